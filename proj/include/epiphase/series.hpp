#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epiphase/dates.hpp"
#include "epiphase/errors.hpp"

namespace epiphase {

// A value per study day.  Most series are contiguous (days.empty(), the axis
// runs start_day, start_day+1, ...); series produced by day-of-week slicing
// keep an explicit, strictly increasing day list instead.  Values can be
// absent (gap days, undefined ratios) without losing their place on the axis.
struct DailySeries {
    int start_day = 1;
    std::vector<int> days;  // explicit axis; empty means contiguous
    std::vector<std::optional<double>> values;
    std::string label;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    bool contiguous() const { return days.empty(); }

    int day_at(std::size_t pos) const {
        return contiguous() ? start_day + static_cast<int>(pos) : days[pos];
    }

    int first_day() const { return day_at(0); }
    int last_day() const { return day_at(size() - 1); }

    std::optional<double> at_day(int day) const {
        if (contiguous()) {
            if (day < start_day || day >= start_day + static_cast<int>(size()))
                return std::nullopt;
            return values[static_cast<std::size_t>(day - start_day)];
        }
        auto it = std::lower_bound(days.begin(), days.end(), day);
        if (it == days.end() || *it != day) return std::nullopt;
        return values[static_cast<std::size_t>(it - days.begin())];
    }

    void check() const {
        if (values.empty()) raise(Errc::empty_series, "series '" + label + "' is empty");
        if (!days.empty()) {
            if (days.size() != values.size())
                raise(Errc::invalid_argument, "day axis and values disagree in length");
            for (std::size_t i = 1; i < days.size(); ++i)
                if (days[i] <= days[i - 1])
                    raise(Errc::invalid_argument, "day axis must be strictly increasing");
        }
    }

    // Collapses an explicit axis back to the contiguous form when the days
    // happen to be consecutive, so downstream code sees the simple shape.
    void normalize() {
        if (days.empty()) return;
        for (std::size_t i = 1; i < days.size(); ++i)
            if (days[i] != days[i - 1] + 1) return;
        start_day = days.front();
        days.clear();
    }

    static DailySeries from_pairs(std::vector<std::pair<int, double>> pairs, std::string label) {
        std::sort(pairs.begin(), pairs.end());
        DailySeries s;
        s.label = std::move(label);
        s.days.reserve(pairs.size());
        s.values.reserve(pairs.size());
        for (const auto& [day, v] : pairs) {
            s.days.push_back(day);
            s.values.push_back(v);
        }
        s.check();
        s.normalize();
        return s;
    }
};

// Trailing simple moving average over the last `window` entries of the axis.
// Absent entries are skipped (the mean runs over the present ones); a window
// with nothing present yields an absent value.  The first window-1 positions
// have no full window and are dropped, so the result starts window-1 entries
// later.  window == 1 returns the series unchanged.
inline DailySeries simple_moving_average(const DailySeries& s, int window) {
    s.check();
    if (window < 1 || static_cast<std::size_t>(window) > s.size())
        raise(Errc::invalid_argument,
              "moving-average window " + std::to_string(window) + " not in [1, " +
                  std::to_string(s.size()) + "]");
    DailySeries out;
    out.label = s.label;
    std::size_t n = s.size();
    std::size_t w = static_cast<std::size_t>(window);
    out.values.reserve(n - w + 1);
    if (s.contiguous()) {
        out.start_day = s.start_day + window - 1;
    } else {
        out.days.assign(s.days.begin() + (window - 1), s.days.end());
    }
    for (std::size_t end = w - 1; end < n; ++end) {
        double sum = 0.0;
        int present = 0;
        for (std::size_t k = end + 1 - w; k <= end; ++k) {
            if (s.values[k]) {
                sum += *s.values[k];
                ++present;
            }
        }
        if (present == 0)
            out.values.push_back(std::nullopt);
        else
            out.values.push_back(sum / present);
    }
    return out;
}

// Relative reduction of a study-period value against its baseline:
// 1 - value / baseline.  Positive when activity dropped.
inline double reduction(double value, double baseline) {
    if (baseline <= 0.0)
        raise(Errc::undefined_baseline,
              "reduction needs a positive baseline, got " + std::to_string(baseline));
    return 1.0 - value / baseline;
}

// One sensor reading: count observed at (day, hour) by the sensor `id`.
// Subway stations and road traffic sensors both flow through this shape.
struct HourlyRecord {
    int day = 0;
    int hour = 0;
    std::string id;
    double value = 0.0;
};

struct HourlySeries {
    std::vector<HourlyRecord> records;

    // Sorts by (day, hour, id) and rejects duplicate keys; every consumer
    // below assumes this canonical order.
    void sort_and_check() {
        auto key_less = [](const HourlyRecord& a, const HourlyRecord& b) {
            if (a.day != b.day) return a.day < b.day;
            if (a.hour != b.hour) return a.hour < b.hour;
            return a.id < b.id;
        };
        std::sort(records.begin(), records.end(), key_less);
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& p = records[i - 1];
            const auto& r = records[i];
            if (p.day == r.day && p.hour == r.hour && p.id == r.id)
                raise(Errc::invalid_record, "duplicate reading for day " + std::to_string(r.day) +
                                                " hour " + std::to_string(r.hour) + " sensor '" +
                                                r.id + "'");
        }
    }
};

enum class DayFilter { all_week, weekdays, weekends };

inline const char* day_filter_name(DayFilter f) {
    switch (f) {
        case DayFilter::all_week: return "all_week";
        case DayFilter::weekdays: return "weekdays";
        case DayFilter::weekends: return "weekends";
    }
    return "?";
}

// A named restriction of hourly data: which days of the week and which hours
// contribute.  An empty hour list means all hours.
struct SliceSpec {
    std::string name = "all_week_all_hours";
    DayFilter day_filter = DayFilter::all_week;
    std::vector<int> hours;  // empty = all hours
};

// Sums counts over sensors and selected hours for every day that passes the
// day-of-week filter and has at least one matching record.  Weekday slicing
// produces gaps, so the result generally carries an explicit day axis; it
// collapses to the contiguous form when the kept days are consecutive.
inline DailySeries slice_aggregate(const HourlySeries& hs, const SliceSpec& spec,
                                   const StudyCalendar& cal) {
    std::set<int> hour_set(spec.hours.begin(), spec.hours.end());
    std::map<int, double> per_day;
    for (const auto& r : hs.records) {
        if (!hour_set.empty() && !hour_set.count(r.hour)) continue;
        int wd = weekday_index(cal.date_of(r.day));
        if (spec.day_filter == DayFilter::weekdays && wd >= 5) continue;
        if (spec.day_filter == DayFilter::weekends && wd < 5) continue;
        per_day[r.day] += r.value;
    }
    if (per_day.empty())
        raise(Errc::empty_series, "slice '" + spec.name + "' selects no data");
    std::vector<std::pair<int, double>> pairs(per_day.begin(), per_day.end());
    return DailySeries::from_pairs(std::move(pairs), spec.name);
}

struct ImputeOutcome {
    HourlySeries series;
    std::size_t filled = 0;
    std::size_t left_missing = 0;
    std::map<std::string, double> missing_rate;  // per sensor, before filling
};

// Fills missing sensor readings from the same (hour, sensor) cell one week
// earlier and one week later: the mean of whichever of the two original
// readings exist, or nothing if both are absent.  The cell universe is the
// set of days any sensor reported at all crossed with the hours each sensor
// ever reports.  A sensor whose share of missing cells exceeds `ceiling` is
// not imputable: with `rejected_out` null that raises sensor_rejected naming
// every such sensor, otherwise the offenders are dropped from the data,
// their ids recorded, and filling proceeds on the rest.
inline ImputeOutcome impute_missing(const HourlySeries& hs, double ceiling = 0.0025,
                                    std::vector<std::string>* rejected_out = nullptr) {
    if (hs.records.empty()) raise(Errc::empty_series, "no hourly records to impute");
    if (ceiling < 0.0 || ceiling >= 1.0)
        raise(Errc::invalid_argument, "missing-rate ceiling must lie in [0, 1)");

    std::set<int> all_days;
    std::map<std::string, std::set<int>> sensor_hours;
    std::map<std::pair<int, int>, std::map<std::string, double>> present;  // (day,hour) -> id -> v
    for (const auto& r : hs.records) {
        all_days.insert(r.day);
        sensor_hours[r.id].insert(r.hour);
        present[{r.day, r.hour}][r.id] = r.value;
    }

    auto value_at = [&](int day, int hour, const std::string& id) -> std::optional<double> {
        auto it = present.find({day, hour});
        if (it == present.end()) return std::nullopt;
        auto jt = it->second.find(id);
        if (jt == it->second.end()) return std::nullopt;
        return jt->second;
    };

    // Cell universe: on the study side (day >= 1) every day between the
    // first and last observed, so a day absent from the whole file still
    // counts as (fillable) holes; on the baseline side (day <= 0) only the
    // observed days, since those exist to serve specific matched dates and
    // the unmatched ones are not holes.
    std::vector<int> day_universe;
    for (auto it = all_days.begin(); it != all_days.end() && *it <= 0; ++it)
        day_universe.push_back(*it);
    if (auto split = all_days.lower_bound(1); split != all_days.end())
        for (int day = *split; day <= *all_days.rbegin(); ++day) day_universe.push_back(day);

    // Missing-rate screen first, so rejection does not depend on fill order.
    std::map<std::string, std::size_t> missing_count;
    for (const auto& [id, hours] : sensor_hours) missing_count[id] = 0;
    for (int day : day_universe)
        for (const auto& [id, hours] : sensor_hours)
            for (int hour : hours)
                if (!value_at(day, hour, id)) ++missing_count[id];

    ImputeOutcome out;
    std::vector<std::string> rejected;
    for (const auto& [id, hours] : sensor_hours) {
        double cells = static_cast<double>(day_universe.size()) * static_cast<double>(hours.size());
        double rate = static_cast<double>(missing_count[id]) / cells;
        out.missing_rate[id] = rate;
        if (rate > ceiling) rejected.push_back(id);
    }
    if (!rejected.empty()) {
        if (!rejected_out) {
            std::string joined;
            for (const auto& id : rejected) joined += (joined.empty() ? "" : ", ") + id;
            raise(Errc::sensor_rejected, "missing rate above ceiling for sensor(s): " + joined);
        }
        *rejected_out = rejected;
        for (const auto& id : rejected) sensor_hours.erase(id);
        if (sensor_hours.empty())
            raise(Errc::sensor_rejected, "every sensor is above the missing-rate ceiling");
    }

    if (rejected.empty()) {
        out.series = hs;
    } else {
        auto dropped = [&](const HourlyRecord& r) { return !sensor_hours.count(r.id); };
        for (const auto& r : hs.records)
            if (!dropped(r)) out.series.records.push_back(r);
    }
    for (int day : day_universe) {
        for (const auto& [id, hours] : sensor_hours) {
            for (int hour : hours) {
                if (value_at(day, hour, id)) continue;
                auto before = value_at(day - 7, hour, id);
                auto after = value_at(day + 7, hour, id);
                std::optional<double> fill;
                if (before && after)
                    fill = 0.5 * (*before + *after);
                else if (before)
                    fill = before;
                else if (after)
                    fill = after;
                if (fill) {
                    out.series.records.push_back({day, hour, id, *fill});
                    ++out.filled;
                } else {
                    ++out.left_missing;
                }
            }
        }
    }
    out.series.sort_and_check();
    return out;
}

}  // namespace epiphase
