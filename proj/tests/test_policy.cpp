#include <catch_amalgamated.hpp>

#include <cmath>

#include "epiphase/policy.hpp"
#include "epiphase/rng.hpp"

using namespace epiphase;

TEST_CASE("sub-index arithmetic on the documented cases") {
    // flagged indicator, max 3: score 1 with a targeted flag
    CHECK(sub_index(1, 0, 3, true) == Catch::Approx(25.0));
    // same score applied nationwide
    CHECK(sub_index(1, 1, 3, true) == Catch::Approx(50.0));
    // score 0 is 0 no matter the flag
    CHECK(sub_index(0, 1, 3, true) == 0.0);
    CHECK(sub_index(0, 0, 4, false) == 0.0);
    // unflagged indicator uses the plain ratio
    CHECK(sub_index(3, 0, 4, false) == Catch::Approx(75.0));
    CHECK(sub_index(2, 0, 2, false) == Catch::Approx(100.0));
    // a flagged indicator at full score and nationwide reaches 100
    CHECK(sub_index(3, 1, 3, true) == Catch::Approx(100.0));
    CHECK_THROWS_AS(sub_index(5, 0, 3, true), Error);
    CHECK_THROWS_AS(sub_index(1, 2, 3, true), Error);
}

TEST_CASE("the reference timeline hits the documented index values") {
    const auto& records = default_policy_records();
    validate_records(records);

    // day 35: stay-at-home advisory, targeted -> sub-index 25
    const PolicyRecord* c6 = active_record(records, "C6", 35);
    REQUIRE(c6 != nullptr);
    CHECK(sub_index(c6->score, c6->flag.value_or(0), 3, true) == Catch::Approx(25.0));

    // day 40: mobility composite over C5 (nothing), C6 (25), C7 (100/3)
    IndexSeries idx = index_series(records, 189);
    CHECK(idx.mobility[39] == Catch::Approx((0.0 + 25.0 + 100.0 / 3.0) / 3.0).margin(0.005));
    CHECK(idx.mobility[39] == Catch::Approx(19.44).margin(0.01));

    // before any mobility measure the composite is 0
    CHECK(idx.mobility[0] == 0.0);
    // the government index reacts on day 1 (information campaigns, tracing)
    CHECK(idx.government[0] > 0.0);
}

TEST_CASE("overlapping records: the latest start wins while in force") {
    std::vector<PolicyRecord> records = {
        {"C1", 1, 100, 1, 1},
        {"C1", 20, 60, 3, 1},
    };
    CHECK(active_record(records, "C1", 10)->score == 1);
    CHECK(active_record(records, "C1", 30)->score == 3);
    // after the later record lapses, the earlier one is in force again
    CHECK(active_record(records, "C1", 70)->score == 1);
    CHECK(active_record(records, "C1", 101) == nullptr);
}

TEST_CASE("record validation rejects out-of-range values") {
    CHECK_THROWS_AS(validate_records({{"C1", 1, 10, 9, 1}}), Error);   // score > max
    CHECK_THROWS_AS(validate_records({{"C1", 1, 10, 1, 2}}), Error);   // bad flag
    CHECK_THROWS_AS(validate_records({{"C1", 10, 5, 1, 1}}), Error);   // ends before start
    CHECK_THROWS_AS(validate_records({{"XX", 1, 10, 1, 1}}), Error);   // unknown indicator
    CHECK_THROWS_AS(
        validate_records({{"C1", 1, 10, 1, 1}, {"C1", 1, 20, 2, 1}}),  // ambiguous overlap
        Error);
    CHECK_NOTHROW(validate_records({{"C1", 1, 10, 1, 1}, {"C1", 5, 20, 2, 1}}));
}

TEST_CASE("indices stay within bounds under random perturbation") {
    const auto& table = default_indicator_table();
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<PolicyRecord> records;
        int n = 1 + static_cast<int>(rng.bounded(12));
        for (int i = 0; i < n; ++i) {
            const IndicatorInfo& info = table[rng.bounded(table.size())];
            PolicyRecord r;
            r.indicator = info.code;
            r.start_day = 1 + static_cast<int>(rng.bounded(60));
            r.end_day = r.start_day + static_cast<int>(rng.bounded(40));
            r.score = static_cast<int>(rng.bounded(info.max_score + 1));
            if (info.flagged) r.flag = static_cast<int>(rng.bounded(2));
            records.push_back(r);
        }
        IndexSeries idx;
        try {
            idx = index_series(records, 100);
        } catch (const Error&) {
            continue;  // duplicate (indicator, start) draws are invalid by design
        }
        for (double v : idx.government) {
            CHECK(v >= 0.0);
            CHECK(v <= 100.0);
        }
        for (double v : idx.mobility) {
            CHECK(v >= 0.0);
            CHECK(v <= 100.0);
        }
    }
}

TEST_CASE("raising one score never lowers the sub-index") {
    for (const IndicatorInfo& info : default_indicator_table()) {
        for (int flag : {0, 1}) {
            double prev = -1.0;
            for (int score = 0; score <= info.max_score; ++score) {
                double v = sub_index(score, info.flagged ? flag : 0, info.max_score, info.flagged);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("the full-score nationwide measure maxes its sub-index") {
    for (const IndicatorInfo& info : default_indicator_table()) {
        double top = sub_index(info.max_score, info.flagged ? 1 : 0, info.max_score, info.flagged);
        CHECK(top == Catch::Approx(100.0));
    }
}
