#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "epiphase/csv.hpp"
#include "epiphase/dates.hpp"
#include "epiphase/geo.hpp"
#include "epiphase/policy.hpp"
#include "epiphase/rng.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

// Parameters of the synthetic input bundle.  The defaults draw a two-wave
// outbreak whose planted structure (case-level breaks, momentum regime
// flips) mirrors the shapes the pipeline is meant to find.  Every planted
// level shift is recovered to within a few days; the selected break COUNT
// can exceed the number of shifts, because the weekly smoothing smears each
// step into a ramp and the information criterion will happily spend an
// extra segment per ramp.  Tests should therefore check that detected
// breaks and planted shifts cover each other, not that the counts agree.
struct SynthSpec {
    std::uint64_t seed = 7;
    int horizon = 189;
    std::vector<int> case_breaks = {50, 82, 128, 156};
    std::vector<double> case_levels = {20.0, 95.0, 170.0, 95.0, 170.0};
    double case_noise_sd = 4.0;
    // Momentum regime flip days; the regime before the first flip is
    // non-positive (expansion), then alternates.
    std::vector<int> geo_flips = {29, 82, 106, 169};
    int contacts_per_day = 10;
    int stations = 6;
    int road_sensors = 5;
};

struct SynthTruth {
    std::vector<int> case_breaks;
    std::vector<int> geo_flips;
    int horizon = 0;
};

namespace detail {

// km offsets to degrees around the region centre.
constexpr double synth_lat0 = 37.55;
constexpr double synth_lon0 = 127.00;

inline GeoPoint offset_km(double north_km, double east_km) {
    constexpr double km_per_deg = 111.1949;
    double lat = synth_lat0 + north_km / km_per_deg;
    double lon = synth_lon0 + east_km / (km_per_deg * std::cos(synth_lat0 * 3.14159265358979 / 180.0));
    return {lat, lon};
}

inline double synth_hour_profile(bool subway, int hour) {
    if (subway) {
        if (hour == 8 || hour == 18) return 2.3;
        if (hour == 7 || hour == 9 || hour == 17 || hour == 19) return 1.5;
        if (hour >= 21) return 0.5;
        if (hour <= 6) return 0.4;
        return 1.0;
    }
    if (hour <= 4) return 0.25;
    if (hour == 8 || hour == 18) return 1.6;
    return 1.0;
}

inline double synth_weekday_factor(const Date& d) {
    int wd = weekday_index(d);
    if (wd == 5) return 0.62;
    if (wd == 6) return 0.55;
    return 1.0;
}

}  // namespace detail

// Segment level for a day given break days (breaks are the last day of each
// segment but the final one).
inline double planted_level(const std::vector<int>& breaks, const std::vector<double>& levels,
                            int day) {
    std::size_t seg = 0;
    while (seg < breaks.size() && day > breaks[seg]) ++seg;
    return levels[seg];
}

// Writes a complete, self-consistent input bundle under `dir`: cases.csv,
// contacts.csv, subway.csv, traffic.csv, holidays.csv, survey.csv,
// policy.csv and policy_indicators.csv, plus a truth.json noting what was
// planted.  Deterministic for a given spec.
inline SynthTruth write_bundle(const std::string& dir, const SynthSpec& spec) {
    if (spec.case_levels.size() != spec.case_breaks.size() + 1)
        raise(Errc::invalid_argument, "need one case level per segment");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(Errc::io_error, "cannot create '" + dir + "': " + ec.message());

    StudyCalendar cal(make_date(2020, 1, 20), spec.horizon);

    // Smoothed planted case level, used to couple reductions and survey
    // responses to the outbreak's intensity.
    auto smooth_level = [&](int day) {
        double sum = 0.0;
        int n = 0;
        for (int d = day - 6; d <= day; ++d) {
            if (d < 1) continue;
            sum += planted_level(spec.case_breaks, spec.case_levels, d);
            ++n;
        }
        return n ? sum / n : 0.0;
    };
    auto subway_reduction = [&](int day) {
        return std::clamp(0.06 + 0.0032 * smooth_level(day), 0.0, 0.92);
    };
    auto traffic_reduction = [&](int day) {
        return std::clamp(0.02 + 0.0016 * smooth_level(day), 0.0, 0.92);
    };

    // cases.csv.  The raw level steps sit 3 days before each planted break:
    // a 7-day trailing mean smears a step over the following week, so the
    // detector sees the mid-crossing (where the fitted cut lands) at the
    // break day itself.  Jumps are far above the noise so that every cut
    // the detector places hugs one of the planted ramps.
    {
        Rng rng = Rng::stream(spec.seed, 1);
        std::vector<int> step_days;
        for (int b : spec.case_breaks) step_days.push_back(b - 3);
        CsvWriter w(dir + "/cases.csv");
        w.row({"date", "count"});
        for (int d = 1; d <= spec.horizon; ++d) {
            double level = planted_level(step_days, spec.case_levels, d);
            double v = std::max(0.0, std::round(level + rng.normal(0.0, spec.case_noise_sd)));
            w.row({format_date(cal.date_of(d)), fmt_num(v)});
        }
        w.close();
    }

    // contacts.csv.  Day geometry follows the planted momentum regimes: in
    // the positive (peak) regime each day's locations sit close to the
    // previous day's already-dispersed set; in the non-positive regime the
    // mass is a tight cluster plus one far outlier, so the day-to-day
    // Hausdorff distance dominates the grouped distance.
    {
        Rng rng = Rng::stream(spec.seed, 2);
        auto regime_positive = [&](int day) {
            std::size_t flips = 0;
            for (int f : spec.geo_flips)
                if (day >= f) ++flips;
            return flips % 2 == 1;
        };
        auto day_spread = [&](int day) {
            return regime_positive(day) || (day > 1 && regime_positive(day - 1));
        };
        CsvWriter w(dir + "/contacts.csv");
        w.row({"date", "case_id", "lat", "lon"});
        std::vector<std::pair<double, double>> prev_km;  // previous day, km coords
        double cl_n = 0.0, cl_e = 0.0;                   // cluster centre walk
        int case_id = 1;
        for (int d = 1; d <= spec.horizon; ++d) {
            std::vector<std::pair<double, double>> today;
            if (day_spread(d)) {
                bool prev_was_spread = d > 1 && day_spread(d - 1) && !prev_km.empty();
                for (int i = 0; i < spec.contacts_per_day; ++i) {
                    if (prev_was_spread) {
                        auto [n0, e0] = prev_km[rng.bounded(prev_km.size())];
                        today.emplace_back(n0 + rng.normal(0.0, 0.2), e0 + rng.normal(0.0, 0.2));
                    } else {
                        today.emplace_back((rng.uniform01() - 0.5) * 20.0,
                                           (rng.uniform01() - 0.5) * 20.0);
                    }
                }
            } else {
                cl_n += rng.normal(0.0, 0.3);
                cl_e += rng.normal(0.0, 0.3);
                for (int i = 0; i < spec.contacts_per_day - 1; ++i)
                    today.emplace_back(cl_n + rng.normal(0.0, 0.4), cl_e + rng.normal(0.0, 0.4));
                double theta = rng.uniform01() * 2.0 * 3.14159265358979;
                double radius = 18.0 + 10.0 * rng.uniform01();
                today.emplace_back(cl_n + radius * std::cos(theta), cl_e + radius * std::sin(theta));
            }
            for (const auto& [n, e] : today) {
                GeoPoint p = detail::offset_km(n, e);
                char lat[24], lon[24];
                std::snprintf(lat, sizeof lat, "%.6f", p.lat);
                std::snprintf(lon, sizeof lon, "%.6f", p.lon);
                w.row({format_date(cal.date_of(d)), "P" + std::to_string(case_id++), lat, lon});
            }
            prev_km = std::move(today);
        }
        w.close();
    }

    // Hourly mobility counts for both years.  The 2019 baseline is the
    // station profile itself; 2020 scales it down by the planted reduction.
    auto write_hourly = [&](const std::string& path, bool subway, int units,
                            const std::string& prefix, int first_hour,
                            std::uint64_t stream) {
        Rng rng = Rng::stream(spec.seed, stream);
        // Missing cells (2020, traffic only) exercise the week-neighbour
        // imputation; kept far below the rejection ceiling.
        std::set<std::tuple<int, int, int>> drop;  // (day, hour, unit)
        if (!subway) drop = {{100, 5, 1}, {100, 6, 1}, {101, 14, 1}, {50, 3, 3}, {51, 3, 3}};
        std::set<std::string> dates_2019;
        for (int d = 1; d <= spec.horizon; ++d)
            dates_2019.insert(format_date(cal.match_day(cal.date_of(d))));
        CsvWriter w(path);
        w.row({"date", "hour", prefix == "S" ? "station_id" : "sensor_id",
               prefix == "S" ? "riders" : "volume"});
        auto unit_id = [&](int u) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%02d", prefix.c_str(), u + 1);
            return std::string(buf);
        };
        double base_amp = subway ? 4000.0 : 900.0;
        auto base = [&](int u, int hour, const Date& date) {
            return base_amp * (1.0 + 0.15 * u) * detail::synth_hour_profile(subway, hour) *
                   detail::synth_weekday_factor(date);
        };
        for (const std::string& iso : dates_2019) {
            Date date = parse_date(iso);
            for (int h = first_hour; h <= 23; ++h)
                for (int u = 0; u < units; ++u) {
                    double v = base(u, h, date) * (1.0 + rng.normal(0.0, 0.01));
                    w.row({iso, std::to_string(h), unit_id(u), fmt_num(std::round(v))});
                }
        }
        for (int d = 1; d <= spec.horizon; ++d) {
            Date date = cal.date_of(d);
            double r = subway ? subway_reduction(d) : traffic_reduction(d);
            for (int h = first_hour; h <= 23; ++h)
                for (int u = 0; u < units; ++u) {
                    double v = base(u, h, date) * (1.0 - r) * (1.0 + rng.normal(0.0, 0.01));
                    if (drop.count({d, h, u})) continue;
                    w.row({format_date(date), std::to_string(h), unit_id(u),
                           fmt_num(std::max(0.0, std::round(v)))});
                }
        }
        w.close();
    };
    write_hourly(dir + "/subway.csv", true, spec.stations, "S", 5, 3);
    write_hourly(dir + "/traffic.csv", false, spec.road_sensors, "T", 0, 4);

    // holidays.csv
    {
        CsvWriter w(dir + "/holidays.csv");
        w.row({"date_2020", "date_2019"});
        for (const auto& h : default_holidays())
            w.row({format_date(h.study), format_date(h.baseline)});
        w.close();
    }

    // survey.csv: risk perception tracks outbreak intensity; mask adoption
    // ratchets up and stays.
    {
        CsvWriter w(dir + "/survey.csv");
        w.row({"date", "metric", "value"});
        std::vector<int> risk_days = {16, 23, 30, 37, 44, 51, 58, 65, 72, 80,
                                      93, 107, 121, 135, 149, 163, 179};
        for (int d : risk_days) {
            if (d > spec.horizon) continue;
            double v = std::round(60.0 + 30.0 * smooth_level(d) / 140.0);
            w.row({format_date(cal.date_of(d)), "risk_perception", fmt_num(v)});
        }
        std::vector<std::pair<int, double>> mask = {{16, 50}, {40, 78}, {61, 85},
                                                    {74, 89}, {117, 92}, {162, 94}};
        for (const auto& [d, v] : mask) {
            if (d > spec.horizon) continue;
            w.row({format_date(cal.date_of(d)), "mask_use", fmt_num(v)});
        }
        w.close();
    }

    // policy.csv + policy_indicators.csv from the reference tables.
    {
        CsvWriter w(dir + "/policy.csv");
        w.row({"indicator", "start_day", "end_day", "score", "flag"});
        for (const auto& r : default_policy_records())
            w.row({r.indicator, std::to_string(r.start_day),
                   std::to_string(std::min(r.end_day, spec.horizon)), std::to_string(r.score),
                   r.flag ? std::to_string(*r.flag) : ""});
        w.close();
        CsvWriter wi(dir + "/policy_indicators.csv");
        wi.row({"indicator", "max_score", "flagged"});
        for (const auto& info : default_indicator_table())
            wi.row({info.code, std::to_string(info.max_score), info.flagged ? "1" : "0"});
        wi.close();
    }

    // truth.json: what was planted, for humans and tests.
    {
        std::ofstream out(dir + "/truth.json");
        if (!out) raise(Errc::io_error, "cannot write truth.json");
        out << "{\n  \"case_breaks\": [";
        for (std::size_t i = 0; i < spec.case_breaks.size(); ++i)
            out << (i ? ", " : "") << spec.case_breaks[i];
        out << "],\n  \"geo_flips\": [";
        for (std::size_t i = 0; i < spec.geo_flips.size(); ++i)
            out << (i ? ", " : "") << spec.geo_flips[i];
        out << "],\n  \"horizon\": " << spec.horizon << "\n}\n";
    }

    return {spec.case_breaks, spec.geo_flips, spec.horizon};
}

}  // namespace epiphase
