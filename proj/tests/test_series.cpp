#include <catch_amalgamated.hpp>

#include "epiphase/series.hpp"

using namespace epiphase;

namespace {

DailySeries contiguous(std::vector<std::optional<double>> v, int start = 1) {
    DailySeries s;
    s.start_day = start;
    s.values = std::move(v);
    s.label = "test";
    return s;
}

}  // namespace

TEST_CASE("moving average over a full window") {
    DailySeries s = contiguous({0, 0, 0, 0, 0, 0, 7});
    DailySeries out = simple_moving_average(s, 7);
    REQUIRE(out.size() == 1);
    CHECK(out.day_at(0) == 7);
    CHECK(*out.values[0] == Catch::Approx(1.0));
}

TEST_CASE("moving average skips absent entries") {
    DailySeries s = contiguous({2.0, std::nullopt, 4.0, std::nullopt, std::nullopt});
    DailySeries out = simple_moving_average(s, 3);
    REQUIRE(out.size() == 3);
    CHECK(*out.values[0] == Catch::Approx(3.0));  // days 1..3: mean of 2 and 4
    CHECK(*out.values[1] == Catch::Approx(4.0));  // days 2..4: only 4 present
    CHECK(*out.values[2] == Catch::Approx(4.0));  // days 3..5
}

TEST_CASE("moving average of an all-absent window is absent") {
    DailySeries s = contiguous({1.0, std::nullopt, std::nullopt, 5.0});
    DailySeries out = simple_moving_average(s, 2);
    REQUIRE(out.size() == 3);
    CHECK_FALSE(out.values[1].has_value());
}

TEST_CASE("window of one is the identity") {
    DailySeries s = contiguous({3.0, 1.0, 4.0});
    DailySeries out = simple_moving_average(s, 1);
    REQUIRE(out.size() == 3);
    CHECK(out.start_day == 1);
    CHECK(*out.values[2] == Catch::Approx(4.0));
}

TEST_CASE("moving average validates the window") {
    DailySeries s = contiguous({1.0, 2.0});
    CHECK_THROWS_AS(simple_moving_average(s, 0), Error);
    CHECK_THROWS_AS(simple_moving_average(s, 3), Error);
}

TEST_CASE("reduction is relative to the baseline") {
    CHECK(reduction(60.0, 100.0) == Catch::Approx(0.4));
    CHECK(reduction(100.0, 100.0) == Catch::Approx(0.0));
    CHECK(reduction(130.0, 100.0) == Catch::Approx(-0.3));
    CHECK_THROWS_AS(reduction(10.0, 0.0), Error);
    CHECK_THROWS_AS(reduction(10.0, -5.0), Error);
}

TEST_CASE("from_pairs builds a sorted explicit axis and collapses runs") {
    DailySeries gappy = DailySeries::from_pairs({{5, 2.0}, {1, 1.0}, {9, 3.0}}, "g");
    REQUIRE(gappy.size() == 3);
    CHECK_FALSE(gappy.contiguous());
    CHECK(gappy.day_at(0) == 1);
    CHECK(*gappy.at_day(5) == Catch::Approx(2.0));
    CHECK_FALSE(gappy.at_day(4).has_value());

    DailySeries runs = DailySeries::from_pairs({{3, 1.0}, {4, 2.0}, {5, 3.0}}, "r");
    CHECK(runs.contiguous());
    CHECK(runs.start_day == 3);
}

TEST_CASE("slice aggregation respects hour and weekday filters") {
    StudyCalendar cal(make_date(2020, 1, 20), 14);
    HourlySeries hs;
    // two sensors, Monday day 1 and Saturday day 6, hours 8 and 14
    for (int day : {1, 6})
        for (int hour : {8, 14})
            for (const char* id : {"a", "b"})
                hs.records.push_back({day, hour, id, 10.0 * hour + (id[0] == 'a' ? 0 : 1)});
    hs.sort_and_check();

    SliceSpec all{"all", DayFilter::all_week, {}};
    DailySeries s = slice_aggregate(hs, all, cal);
    REQUIRE(s.size() == 2);
    CHECK(*s.at_day(1) == Catch::Approx(80 + 81 + 140 + 141));

    SliceSpec morning{"morning", DayFilter::all_week, {8}};
    CHECK(*slice_aggregate(hs, morning, cal).at_day(1) == Catch::Approx(161));

    SliceSpec weekday{"weekday", DayFilter::weekdays, {}};
    DailySeries wd = slice_aggregate(hs, weekday, cal);
    REQUIRE(wd.size() == 1);
    CHECK(wd.day_at(0) == 1);

    SliceSpec weekend{"weekend", DayFilter::weekends, {}};
    DailySeries we = slice_aggregate(hs, weekend, cal);
    REQUIRE(we.size() == 1);
    CHECK(we.day_at(0) == 6);
}

TEST_CASE("a slice that matches nothing raises empty_series") {
    StudyCalendar cal(make_date(2020, 1, 20), 5);  // Monday..Friday only
    HourlySeries hs;
    hs.records.push_back({1, 8, "a", 5.0});
    hs.records.push_back({2, 8, "a", 6.0});
    hs.sort_and_check();
    SliceSpec weekend{"weekend", DayFilter::weekends, {}};
    CHECK_THROWS_AS(slice_aggregate(hs, weekend, cal), Error);
}

TEST_CASE("imputation fills isolated holes with the week-offset median") {
    HourlySeries hs;
    // sensor "a": days 1..15 hour 8, with day 8 missing; neighbours at day 1
    // and day 15 carry 10 and 14, so the filled value is their median 12
    for (int day = 1; day <= 15; ++day) {
        if (day == 8) continue;
        double v = (day == 1) ? 10.0 : (day == 15 ? 14.0 : 20.0);
        hs.records.push_back({day, 8, "a", v});
    }
    hs.sort_and_check();
    ImputeOutcome out = impute_missing(hs, 0.5);
    CHECK(out.filled == 1);
    bool found = false;
    for (const auto& r : out.series.records)
        if (r.day == 8 && r.hour == 8 && r.id == "a") {
            found = true;
            CHECK(r.value == Catch::Approx(12.0));
        }
    CHECK(found);
}

TEST_CASE("imputation rejects a sensor above the missing ceiling") {
    HourlySeries hs;
    for (int day = 1; day <= 10; ++day) {
        hs.records.push_back({day, 8, "good", 1.0});
        if (day <= 5) hs.records.push_back({day, 8, "bad", 1.0});
    }
    hs.sort_and_check();
    // "bad" is missing half its cells: far above the ceiling
    CHECK_THROWS_AS(impute_missing(hs, 0.0025), Error);

    std::vector<std::string> rejected;
    ImputeOutcome out = impute_missing(hs, 0.0025, &rejected);
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0] == "bad");
    for (const auto& r : out.series.records) CHECK(r.id == "good");
}
