#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "epiphase/dates.hpp"
#include "epiphase/errors.hpp"
#include "epiphase/geo.hpp"
#include "epiphase/policy.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

// Plain comma-separated table, header row required, no quoting (none of the
// schemas here need embedded commas).  Line numbers are kept so schema
// errors can point at the offending row.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based source line per row
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] inline void fail_at(const CsvTable& t, std::size_t row, const std::string& msg) {
    raise(Errc::parse_error,
          t.path + ":" + std::to_string(row < t.rows.size() ? t.lines[row] : 0) + ": " + msg);
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open '" + path + "'");
    CsvTable t;
    t.path = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size())
                raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(t.header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
            t.lines.push_back(lineno);
        }
    }
    if (in.bad()) raise(Errc::io_error, "read failure on '" + path + "'");
    if (t.header.empty()) raise(Errc::parse_error, path + ": empty file, header row required");
    return t;
}

inline void expect_columns(const CsvTable& t, const std::vector<std::string>& cols) {
    if (t.header != cols) {
        std::string want;
        for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
        std::string got;
        for (const auto& c : t.header) got += (got.empty() ? "" : ",") + c;
        raise(Errc::parse_error, t.path + ":1: header must be '" + want + "', got '" + got + "'");
    }
}

inline double parse_number(const CsvTable& t, std::size_t row, std::size_t col) {
    const std::string& s = t.rows[row][col];
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        detail::fail_at(t, row, "'" + s + "' is not a number (column " + t.header[col] + ")");
    }
}

inline int parse_integer(const CsvTable& t, std::size_t row, std::size_t col) {
    const std::string& s = t.rows[row][col];
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        detail::fail_at(t, row, "'" + s + "' is not an integer (column " + t.header[col] + ")");
    }
}

inline Date parse_date_at(const CsvTable& t, std::size_t row, std::size_t col) {
    try {
        return parse_date(t.rows[row][col]);
    } catch (const Error& e) {
        detail::fail_at(t, row, e.what());
    }
}

// --- typed loaders -------------------------------------------------------

// cases.csv: date,count.  One row per day, duplicates rejected; the series
// axis is the study day index.
inline DailySeries load_cases(const std::string& path, const StudyCalendar& cal) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"date", "count"});
    std::map<int, std::size_t> seen;  // day -> row
    std::vector<std::pair<int, double>> pairs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        int day = cal.day_index(parse_date_at(t, r, 0));
        double v = parse_number(t, r, 1);
        if (v < 0.0) detail::fail_at(t, r, "negative case count");
        auto [it, fresh] = seen.emplace(day, r);
        if (!fresh)
            detail::fail_at(t, r, "duplicate date " + t.rows[r][0] + " (first at line " +
                                      std::to_string(t.lines[it->second]) + ")");
        pairs.emplace_back(day, v);
    }
    if (pairs.empty()) raise(Errc::parse_error, path + ": no data rows");
    DailySeries s = DailySeries::from_pairs(std::move(pairs), "cases");
    return s;
}

// contacts.csv: date,case_id,lat,lon.  One row per published contact
// location; exact duplicate coordinates within a day collapse to one point.
inline std::vector<ContactDay> load_contacts(const std::string& path, const StudyCalendar& cal,
                                             std::size_t* collapsed = nullptr) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"date", "case_id", "lat", "lon"});
    std::map<int, ContactDay> by_day;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        int day = cal.day_index(parse_date_at(t, r, 0));
        GeoPoint p{parse_number(t, r, 2), parse_number(t, r, 3)};
        try {
            validate_point(p);
        } catch (const Error& e) {
            detail::fail_at(t, r, e.what());
        }
        ContactDay& cd = by_day[day];
        cd.day = day;
        cd.points.push_back(p);
    }
    std::vector<ContactDay> days;
    std::size_t dropped = 0;
    for (auto& [day, cd] : by_day) {
        dropped += dedup_points(cd);
        days.push_back(std::move(cd));
    }
    if (collapsed) *collapsed = dropped;
    return days;
}

// subway.csv / traffic.csv: date,hour,<id column>,<value column>.
inline HourlySeries load_hourly(const std::string& path, const StudyCalendar& cal,
                                const std::string& id_col, const std::string& value_col) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"date", "hour", id_col, value_col});
    HourlySeries hs;
    std::map<std::tuple<int, int, std::string>, std::size_t> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        HourlyRecord rec;
        rec.day = cal.day_index(parse_date_at(t, r, 0));
        rec.hour = parse_integer(t, r, 1);
        if (rec.hour < 0 || rec.hour > 23) detail::fail_at(t, r, "hour outside 0..23");
        rec.id = t.rows[r][2];
        if (rec.id.empty()) detail::fail_at(t, r, "empty " + id_col);
        rec.value = parse_number(t, r, 3);
        if (rec.value < 0.0) detail::fail_at(t, r, "negative " + value_col);
        auto [it, fresh] = seen.emplace(std::make_tuple(rec.day, rec.hour, rec.id), r);
        if (!fresh)
            detail::fail_at(t, r, "duplicate reading for " + t.rows[r][0] + " hour " +
                                      t.rows[r][1] + " " + id_col + " '" + rec.id +
                                      "' (first at line " + std::to_string(t.lines[it->second]) +
                                      ")");
        hs.records.push_back(std::move(rec));
    }
    hs.sort_and_check();
    return hs;
}

// holidays.csv: date_2020,date_2019.
inline std::vector<HolidayPair> load_holidays(const std::string& path) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"date_2020", "date_2019"});
    std::vector<HolidayPair> out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (!seen.insert(t.rows[r][0]).second)
            detail::fail_at(t, r, "duplicate holiday date " + t.rows[r][0]);
        out.push_back({parse_date_at(t, r, 0), parse_date_at(t, r, 1)});
    }
    return out;
}

struct SurveyPoint {
    int day = 0;
    std::string metric;
    double value = 0.0;
};

// survey.csv: date,metric,value.  Metrics are free-form labels.
inline std::vector<SurveyPoint> load_survey(const std::string& path, const StudyCalendar& cal) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"date", "metric", "value"});
    std::vector<SurveyPoint> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SurveyPoint p;
        p.day = cal.day_index(parse_date_at(t, r, 0));
        p.metric = t.rows[r][1];
        if (p.metric.empty()) detail::fail_at(t, r, "empty metric");
        p.value = parse_number(t, r, 2);
        out.push_back(std::move(p));
    }
    return out;
}

// policy records: indicator,start_day,end_day,score,flag (flag may be empty).
inline std::vector<PolicyRecord> load_policy_records(
    const std::string& path, const std::vector<IndicatorInfo>& table = default_indicator_table()) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"indicator", "start_day", "end_day", "score", "flag"});
    std::vector<PolicyRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        PolicyRecord rec;
        rec.indicator = t.rows[r][0];
        rec.start_day = parse_integer(t, r, 1);
        rec.end_day = parse_integer(t, r, 2);
        rec.score = parse_integer(t, r, 3);
        if (!t.rows[r][4].empty()) rec.flag = parse_integer(t, r, 4);
        out.push_back(std::move(rec));
    }
    try {
        validate_records(out, table);
    } catch (const Error& e) {
        raise(Errc::parse_error, path + ": " + e.what());
    }
    return out;
}

// indicator table: indicator,max_score,flagged.
inline std::vector<IndicatorInfo> load_indicator_table(const std::string& path) {
    CsvTable t = read_csv(path);
    expect_columns(t, {"indicator", "max_score", "flagged"});
    std::vector<IndicatorInfo> out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        IndicatorInfo info;
        info.code = t.rows[r][0];
        if (!seen.insert(info.code).second) detail::fail_at(t, r, "duplicate indicator " + info.code);
        info.max_score = parse_integer(t, r, 1);
        if (info.max_score < 1) detail::fail_at(t, r, "max_score must be positive");
        int fl = parse_integer(t, r, 2);
        if (fl != 0 && fl != 1) detail::fail_at(t, r, "flagged must be 0 or 1");
        info.flagged = fl == 1;
        out.push_back(std::move(info));
    }
    if (out.empty()) raise(Errc::parse_error, path + ": no indicators");
    return out;
}

// --- writers --------------------------------------------------------------

// Fixed-format number rendering so identical values always serialize to
// identical bytes.  %.12g keeps full precision for the magnitudes used here
// while printing integers without a trailing ".0".
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
        if (!out_) raise(Errc::io_error, "cannot write '" + path + "'");
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
        if (!out_) raise(Errc::io_error, "write failure on '" + path_ + "'");
    }

    void close() {
        out_.close();
        if (!out_) raise(Errc::io_error, "write failure on '" + path_ + "'");
    }

  private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace epiphase
