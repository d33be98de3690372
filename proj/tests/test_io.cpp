#include <catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "epiphase/csv.hpp"
#include "epiphase/synth.hpp"
#include "helpers.hpp"

using namespace epiphase;
using testutil::TempDir;
using testutil::spit;

TEST_CASE("csv reader: header checking and line-accurate errors") {
    TempDir tmp("io_reader");
    spit(tmp.file("ok.csv"), "date,count\n2020-01-20,4\n2020-01-21,6\n");
    StudyCalendar cal(make_date(2020, 1, 20), 30);
    DailySeries s = load_cases(tmp.file("ok.csv"), cal);
    REQUIRE(s.size() == 2);
    CHECK(*s.at_day(1) == Catch::Approx(4.0));

    spit(tmp.file("head.csv"), "day,count\n1,4\n");
    CHECK_THROWS_WITH(load_cases(tmp.file("head.csv"), cal),
                      Catch::Matchers::ContainsSubstring("date"));

    spit(tmp.file("bad_num.csv"), "date,count\n2020-01-20,many\n");
    try {
        load_cases(tmp.file("bad_num.csv"), cal);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    spit(tmp.file("dup.csv"), "date,count\n2020-01-20,1\n2020-01-20,2\n");
    CHECK_THROWS_AS(load_cases(tmp.file("dup.csv"), cal), Error);

    spit(tmp.file("neg.csv"), "date,count\n2020-01-20,-3\n");
    CHECK_THROWS_AS(load_cases(tmp.file("neg.csv"), cal), Error);

    CHECK_THROWS_AS(load_cases(tmp.file("absent.csv"), cal), Error);
    try {
        load_cases(tmp.file("absent.csv"), cal);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::io_error);
    }

    // short rows are schema errors, not crashes
    spit(tmp.file("short.csv"), "date,count\n2020-01-20\n");
    CHECK_THROWS_AS(load_cases(tmp.file("short.csv"), cal), Error);
}

TEST_CASE("number formatting is byte-stable and lossless enough") {
    CHECK(fmt_num(3.0) == "3");
    CHECK(fmt_num(0.25) == "0.25");
    CHECK(fmt_num(-1.5) == "-1.5");
    CHECK(fmt_num(1.0 / 3.0) == "0.333333333333");
    // a round-trip through the printed form stays within 1e-12 relative
    for (double v : {0.1, 123456.789012, 1e-7, 9.999999999e5}) {
        double back = std::stod(fmt_num(v));
        CHECK(back == Catch::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("contacts loader collapses exact duplicates per day") {
    TempDir tmp("io_contacts");
    StudyCalendar cal(make_date(2020, 1, 20), 30);
    spit(tmp.file("contacts.csv"),
         "date,case_id,lat,lon\n"
         "2020-01-21,a,37.5,127.0\n"
         "2020-01-21,b,37.5,127.0\n"
         "2020-01-21,a,37.6,127.1\n"
         "2020-01-22,c,37.5,127.0\n");
    std::size_t collapsed = 0;
    std::vector<ContactDay> days = load_contacts(tmp.file("contacts.csv"), cal, &collapsed);
    REQUIRE(days.size() == 2);
    CHECK(days[0].day == 2);
    CHECK(days[0].points.size() == 2);
    CHECK(collapsed == 1);

    spit(tmp.file("bad_coord.csv"), "date,case_id,lat,lon\n2020-01-21,a,95.0,127.0\n");
    CHECK_THROWS_AS(load_contacts(tmp.file("bad_coord.csv"), cal), Error);
}

TEST_CASE("hourly loader keys on the configured columns") {
    TempDir tmp("io_hourly");
    StudyCalendar cal(make_date(2020, 1, 20), 30);
    spit(tmp.file("subway.csv"),
         "date,hour,station_id,riders\n"
         "2020-01-20,5,s01,1200\n"
         "2020-01-20,6,s01,3400\n"
         "2019-01-21,5,s01,1500\n");
    HourlySeries hs = load_hourly(tmp.file("subway.csv"), cal, "station_id", "riders");
    REQUIRE(hs.records.size() == 3);
    // 2019 rows land on negative day indices
    CHECK(hs.records.front().day < 0);

    // duplicate (day, hour, id) is rejected
    spit(tmp.file("dup.csv"),
         "date,hour,station_id,riders\n"
         "2020-01-20,5,s01,1\n"
         "2020-01-20,5,s01,2\n");
    CHECK_THROWS_AS(load_hourly(tmp.file("dup.csv"), cal, "station_id", "riders"), Error);
}

TEST_CASE("policy and survey loaders round-trip through their writers") {
    TempDir tmp("io_policy");

    // write the reference records with the same writer the pipeline uses
    CsvWriter w(tmp.file("policy.csv"));
    w.row({"indicator", "start_day", "end_day", "score", "flag"});
    for (const PolicyRecord& r : default_policy_records())
        w.row({r.indicator, std::to_string(r.start_day), std::to_string(r.end_day),
               std::to_string(r.score), r.flag ? std::to_string(*r.flag) : ""});
    w.close();

    std::vector<PolicyRecord> records = load_policy_records(tmp.file("policy.csv"));
    const auto& ref = default_policy_records();
    REQUIRE(records.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(records[i].indicator == ref[i].indicator);
        CHECK(records[i].start_day == ref[i].start_day);
        CHECK(records[i].end_day == ref[i].end_day);
        CHECK(records[i].score == ref[i].score);
        CHECK(records[i].flag == ref[i].flag);
    }

    CsvWriter wi(tmp.file("indicators.csv"));
    wi.row({"indicator", "max_score", "flagged"});
    for (const IndicatorInfo& info : default_indicator_table())
        wi.row({info.code, std::to_string(info.max_score), info.flagged ? "1" : "0"});
    wi.close();
    std::vector<IndicatorInfo> table = load_indicator_table(tmp.file("indicators.csv"));
    REQUIRE(table.size() == default_indicator_table().size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].code == default_indicator_table()[i].code);
        CHECK(table[i].max_score == default_indicator_table()[i].max_score);
        CHECK(table[i].flagged == default_indicator_table()[i].flagged);
    }
}

TEST_CASE("every file of the synthetic bundle parses with its own loader") {
    TempDir tmp("io_bundle");
    SynthSpec spec;
    SynthTruth truth = write_bundle(tmp.path.string(), spec);
    StudyCalendar cal(make_date(2020, 1, 20), spec.horizon);

    DailySeries cases = load_cases(tmp.file("cases.csv"), cal);
    CHECK(cases.size() == static_cast<std::size_t>(spec.horizon));
    CHECK(cases.contiguous());
    CHECK(cases.start_day == 1);

    std::vector<ContactDay> contacts = load_contacts(tmp.file("contacts.csv"), cal);
    CHECK(contacts.size() == static_cast<std::size_t>(spec.horizon));

    HourlySeries subway = load_hourly(tmp.file("subway.csv"), cal, "station_id", "riders");
    HourlySeries traffic = load_hourly(tmp.file("traffic.csv"), cal, "sensor_id", "volume");
    CHECK(subway.records.size() > 10000);
    CHECK(traffic.records.size() > 10000);

    std::vector<HolidayPair> holidays = load_holidays(tmp.file("holidays.csv"));
    CHECK_FALSE(holidays.empty());

    std::vector<SurveyPoint> survey = load_survey(tmp.file("survey.csv"), cal);
    CHECK_FALSE(survey.empty());

    std::vector<PolicyRecord> records = load_policy_records(tmp.file("policy.csv"));
    validate_records(records, load_indicator_table(tmp.file("policy_indicators.csv")));

    CHECK(truth.case_breaks.size() == 4);
    CHECK(truth.geo_flips.size() == 4);
}
