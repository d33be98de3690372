#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epiphase/changepoint.hpp"
#include "epiphase/csv.hpp"
#include "epiphase/dates.hpp"
#include "epiphase/errors.hpp"
#include "epiphase/fits.hpp"
#include "epiphase/geo.hpp"
#include "epiphase/phases.hpp"
#include "epiphase/policy.hpp"
#include "epiphase/regression.hpp"
#include "epiphase/series.hpp"
#include "epiphase/svg.hpp"

namespace epiphase {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "epiphase";
inline constexpr const char* tool_version = "0.1.0";

// Every knob of the batch pipeline.  The CLI fills this from a flat
// key=value config file plus command-line overrides; defaults reproduce the
// reference analysis.
struct PipelineConfig {
    // input files
    std::string cases;
    std::string contacts;
    std::string subway;
    std::string traffic;
    std::string holidays;  // optional, built-in table when empty
    std::string survey;    // optional, fig4 overlays skipped when empty
    std::string policy;
    std::string policy_indicators;  // optional, built-in table when empty

    std::string out = "out";
    std::uint64_t seed = 0;

    // study window
    std::string origin = "2020-01-20";
    int horizon = 189;

    // smoothing
    int sma_window = 7;

    // count-series breaks
    int max_breaks = 8;
    int min_segment = 7;
    int bootstrap_reps = 1000;  // 0 skips the intervals
    double ci_level = 0.95;

    // dispersion
    int min_run = 7;
    bool planar = false;

    // phase synthesis
    int merge_window = 4;
    int lookahead = 14;
    double slope_t_threshold = 2.0;

    // per-phase fits
    bool raw_counts_regressor = false;
    int case_lag = 0;

    // mobility ingestion and seasonality scan
    double missing_ceiling = 0.0025;
    bool smooth_before_reduction = false;
    std::string commute_preset = "caption";  // "caption" 7-9 & 18-20, "table" 8-9 & 18-20
    int seasonality_max_breaks = 6;
    int seasonality_bootstrap_reps = 0;

    StudyCalendar calendar() const {
        if (horizon < 1) raise(Errc::invalid_argument, "horizon must be positive");
        StudyCalendar cal(parse_date(origin), horizon);
        if (!holidays.empty()) cal.set_holidays(load_holidays(holidays));
        return cal;
    }

    // Stable key=value echo, used verbatim in the manifest and hashed for
    // the config fingerprint.
    std::vector<std::pair<std::string, std::string>> echo() const {
        auto num = [](double v) { return fmt_num(v); };
        return {
            {"cases", cases},
            {"contacts", contacts},
            {"subway", subway},
            {"traffic", traffic},
            {"holidays", holidays},
            {"survey", survey},
            {"policy", policy},
            {"policy_indicators", policy_indicators},
            {"out", out},
            {"seed", std::to_string(seed)},
            {"origin", origin},
            {"horizon", std::to_string(horizon)},
            {"sma_window", std::to_string(sma_window)},
            {"max_breaks", std::to_string(max_breaks)},
            {"min_segment", std::to_string(min_segment)},
            {"bootstrap_reps", std::to_string(bootstrap_reps)},
            {"ci_level", num(ci_level)},
            {"min_run", std::to_string(min_run)},
            {"planar", planar ? "1" : "0"},
            {"merge_window", std::to_string(merge_window)},
            {"lookahead", std::to_string(lookahead)},
            {"slope_t_threshold", num(slope_t_threshold)},
            {"raw_counts_regressor", raw_counts_regressor ? "1" : "0"},
            {"case_lag", std::to_string(case_lag)},
            {"missing_ceiling", num(missing_ceiling)},
            {"smooth_before_reduction", smooth_before_reduction ? "1" : "0"},
            {"commute_preset", commute_preset},
            {"seasonality_max_breaks", std::to_string(seasonality_max_breaks)},
            {"seasonality_bootstrap_reps", std::to_string(seasonality_bootstrap_reps)},
        };
    }

    std::string config_hash() const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
        auto mix = [&](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
        };
        for (const auto& [k, v] : echo()) {
            mix(k);
            mix("=");
            mix(v);
            mix("\n");
        }
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    std::vector<int> commute_hours() const {
        if (commute_preset == "caption") return {7, 8, 18, 19};
        if (commute_preset == "table") return {8, 18, 19};
        raise(Errc::invalid_argument, "commute_preset must be 'caption' or 'table'");
    }
};

// The six time-of-day x day-of-week slices scanned per mode.  Hour ranges
// are half-open on the clock: afternoon 2PM-5PM, nighttime 9PM-12AM.
inline std::vector<SliceSpec> seasonality_slices(const PipelineConfig& cfg) {
    return {
        {"all_week_all_hours", DayFilter::all_week, {}},
        {"all_week_afternoon_off_peak", DayFilter::all_week, {14, 15, 16}},
        {"all_week_nighttime", DayFilter::all_week, {21, 22, 23}},
        {"weekday_all_hours", DayFilter::weekdays, {}},
        {"weekday_commute_hours", DayFilter::weekdays, cfg.commute_hours()},
        {"weekend_all_hours", DayFilter::weekends, {}},
    };
}

// ---------------------------------------------------------------------------
// Mobility ingestion: one file carries both the study year and the baseline
// year; readings are keyed by unbounded day index so baseline days sit at
// negative positions on the same axis.

struct MobilityData {
    std::string mode;  // "subway" or "traffic"
    HourlySeries series;
    std::vector<std::string> rejected;
    std::size_t filled = 0;
    std::size_t left_missing = 0;
    std::map<std::string, double> missing_rate;
    std::set<int> hours;                                        // observed hours
    std::map<std::pair<int, int>, std::map<std::string, double>> cell;  // (day,hour)->id->v
};

inline MobilityData load_mobility(const std::string& mode, const std::string& path,
                                  const StudyCalendar& cal, double ceiling) {
    MobilityData md;
    md.mode = mode;
    bool subway = mode == "subway";
    HourlySeries raw = load_hourly(path, cal, subway ? "station_id" : "sensor_id",
                                   subway ? "riders" : "volume");
    ImputeOutcome imp = impute_missing(raw, ceiling, &md.rejected);
    md.series = std::move(imp.series);
    md.filled = imp.filled;
    md.left_missing = imp.left_missing;
    md.missing_rate = std::move(imp.missing_rate);
    for (const auto& r : md.series.records) {
        md.hours.insert(r.hour);
        md.cell[{r.day, r.hour}][r.id] = r.value;
    }
    return md;
}

namespace detail {

inline bool slice_keeps_day(const SliceSpec& spec, const StudyCalendar& cal, int day) {
    if (spec.day_filter == DayFilter::all_week) return true;
    bool weekend = is_weekend(cal.date_of(day));
    return spec.day_filter == DayFilter::weekends ? weekend : !weekend;
}

inline std::vector<int> slice_hours(const SliceSpec& spec, const MobilityData& md) {
    std::vector<int> hours;
    for (int h : md.hours)
        if (spec.hours.empty() || std::count(spec.hours.begin(), spec.hours.end(), h))
            hours.push_back(h);
    return hours;
}

// Paired sums for one (day, hour): only readings whose sensor reported in
// both years contribute, so a hole on either side cannot skew the ratio.
inline bool paired_cell(const MobilityData& md, int day, int baseline_day, int hour, double& num,
                        double& den) {
    auto cur = md.cell.find({day, hour});
    auto base = md.cell.find({baseline_day, hour});
    if (cur == md.cell.end() || base == md.cell.end()) return false;
    bool any = false;
    for (const auto& [id, v] : cur->second) {
        auto jt = base->second.find(id);
        if (jt == base->second.end()) continue;
        num += v;
        den += jt->second;
        any = true;
    }
    return any;
}

}  // namespace detail

// Daily reduction series for a slice: 1 - (study-day sum / baseline-day sum)
// over paired readings in the slice's hours.  With smooth_first the two sums
// are smoothed before the ratio; otherwise the caller smooths the ratio.
inline DailySeries slice_reduction_daily(const MobilityData& md, const StudyCalendar& cal,
                                         const SliceSpec& spec, int horizon, int sma_window,
                                         bool smooth_first) {
    std::vector<int> hours = detail::slice_hours(spec, md);
    std::vector<std::pair<int, double>> nums, dens;
    for (int d = 1; d <= horizon; ++d) {
        if (!detail::slice_keeps_day(spec, cal, d)) continue;
        int b = cal.day_index(cal.match_day(cal.date_of(d)));
        double num = 0.0, den = 0.0;
        bool any = false;
        for (int h : hours) any = detail::paired_cell(md, d, b, h, num, den) || any;
        if (!any || den <= 0.0) continue;
        nums.emplace_back(d, num);
        dens.emplace_back(d, den);
    }
    if (nums.empty())
        raise(Errc::empty_series, md.mode + " slice '" + spec.name + "' has no usable days");
    std::string label = md.mode + "_" + spec.name + "_reduction";
    if (!smooth_first) {
        std::vector<std::pair<int, double>> pairs;
        for (std::size_t i = 0; i < nums.size(); ++i)
            pairs.emplace_back(nums[i].first, reduction(nums[i].second, dens[i].second));
        return DailySeries::from_pairs(std::move(pairs), label);
    }
    DailySeries num_s = simple_moving_average(DailySeries::from_pairs(nums, "num"), sma_window);
    DailySeries den_s = simple_moving_average(DailySeries::from_pairs(dens, "den"), sma_window);
    std::vector<std::pair<int, double>> pairs;
    for (std::size_t i = 0; i < num_s.size(); ++i) {
        auto n = num_s.values[i];
        auto d = den_s.values[i];
        if (n && d) pairs.emplace_back(num_s.day_at(i), reduction(*n, *d));
    }
    return DailySeries::from_pairs(std::move(pairs), label);
}

// Hourly reduction laid out flat in (day, hour) order, for the seasonality
// scan.  Positions remember which cell each flat point came from.
struct HourlyFlat {
    std::vector<double> values;
    std::vector<std::pair<int, int>> pos;  // (day, hour) per point
    int hours_per_day = 0;
};

inline HourlyFlat slice_reduction_hourly(const MobilityData& md, const StudyCalendar& cal,
                                         const SliceSpec& spec, int horizon) {
    HourlyFlat flat;
    std::vector<int> hours = detail::slice_hours(spec, md);
    flat.hours_per_day = static_cast<int>(hours.size());
    for (int d = 1; d <= horizon; ++d) {
        if (!detail::slice_keeps_day(spec, cal, d)) continue;
        int b = cal.day_index(cal.match_day(cal.date_of(d)));
        for (int h : hours) {
            double num = 0.0, den = 0.0;
            if (!detail::paired_cell(md, d, b, h, num, den) || den <= 0.0) continue;
            flat.values.push_back(reduction(num, den));
            flat.pos.emplace_back(d, h);
        }
    }
    return flat;
}

// ---------------------------------------------------------------------------
// Stage results.

struct CaseStage {
    DailySeries counts;
    DailySeries counts_sma;
    Segmentation seg;
};

struct GeoStage {
    DispersionSeries disp;
    std::vector<int> transitions;
};

struct SeasonalityEntry {
    std::string mode;
    std::string slice;
    bool ok = false;
    std::string note;
    Segmentation seg;                          // breaks as flat point indices
    std::vector<std::pair<int, int>> breaks;   // (day, hour) per break
    std::vector<std::pair<int, int>> interval_days;  // CI in days, when bootstrapped
    std::size_t n_points = 0;
    int points_per_day = 0;
};

inline BreakConfig break_config(const PipelineConfig& cfg) {
    BreakConfig bc;
    bc.max_breaks = cfg.max_breaks;
    bc.min_segment = cfg.min_segment;
    bc.bootstrap_reps = cfg.bootstrap_reps;
    bc.ci_level = cfg.ci_level;
    bc.seed = cfg.seed;
    return bc;
}

inline SynthesisConfig synthesis_config(const PipelineConfig& cfg) {
    SynthesisConfig sc;
    sc.merge_window = cfg.merge_window;
    sc.slope_t_threshold = cfg.slope_t_threshold;
    sc.lookahead = cfg.lookahead;
    sc.min_segment = cfg.min_segment;
    return sc;
}

inline CaseStage run_case_stage(const PipelineConfig& cfg, const StudyCalendar& cal) {
    CaseStage st;
    st.counts = load_cases(cfg.cases, cal);
    st.counts_sma = simple_moving_average(st.counts, cfg.sma_window);
    st.counts_sma.label = "cases_sma";
    BreakConfig bc = break_config(cfg);
    if (bc.bootstrap_reps != 0 && bc.bootstrap_reps < 100)
        raise(Errc::invalid_argument, "bootstrap_reps must be 0 or at least 100");
    st.seg = select_breaks(st.counts_sma, bc);
    if (bc.bootstrap_reps > 0) bootstrap_ci(st.seg, st.counts_sma, bc);
    return st;
}

inline GeoStage run_geo_stage(const PipelineConfig& cfg, const StudyCalendar& cal) {
    GeoStage st;
    std::vector<ContactDay> days = load_contacts(cfg.contacts, cal);
    st.disp = momentum_series(days, cfg.sma_window,
                              cfg.planar ? GeoMetric::planar_km : GeoMetric::haversine);
    st.transitions = sign_transitions(st.disp.momentum_sma, cfg.min_run);
    return st;
}

inline PhaseTimeline run_phase_stage(const CaseStage& cs, const GeoStage& gs,
                                     const PipelineConfig& cfg) {
    std::vector<int> fused = fuse_transitions(cs.seg.breaks, gs.transitions, cfg.merge_window);
    return build_timeline(fused, cs.counts_sma, gs.disp.momentum_sma, synthesis_config(cfg));
}

inline std::vector<SeasonalityEntry> run_seasonality_stage(const MobilityData& md,
                                                           const StudyCalendar& cal,
                                                           const PipelineConfig& cfg) {
    std::vector<SeasonalityEntry> out;
    for (const SliceSpec& spec : seasonality_slices(cfg)) {
        SeasonalityEntry e;
        e.mode = md.mode;
        e.slice = spec.name;
        HourlyFlat flat = slice_reduction_hourly(md, cal, spec, cfg.horizon);
        e.n_points = flat.values.size();
        e.points_per_day = flat.hours_per_day;
        int min_seg = cfg.min_segment * std::max(1, flat.hours_per_day);
        if (flat.values.size() < 2 * static_cast<std::size_t>(min_seg)) {
            e.note = "series too short for two minimum segments";
            out.push_back(std::move(e));
            continue;
        }
        DailySeries flat_series;
        flat_series.start_day = 1;
        for (double v : flat.values) flat_series.values.emplace_back(v);
        flat_series.label = md.mode + "_" + spec.name;
        BreakConfig bc;
        bc.max_breaks = cfg.seasonality_max_breaks;
        bc.min_segment = min_seg;
        bc.bootstrap_reps = cfg.seasonality_bootstrap_reps;
        bc.ci_level = cfg.ci_level;
        bc.seed = cfg.seed;
        e.seg = select_breaks(flat_series, bc);
        if (bc.bootstrap_reps >= 100) {
            bootstrap_ci(e.seg, flat_series, bc);
            for (const auto& iv : e.seg.intervals)
                e.interval_days.emplace_back(flat.pos[static_cast<std::size_t>(iv.low) - 1].first,
                                             flat.pos[static_cast<std::size_t>(iv.high) - 1].first);
        }
        for (int b : e.seg.breaks) e.breaks.push_back(flat.pos[static_cast<std::size_t>(b) - 1]);
        e.ok = true;
        out.push_back(std::move(e));
    }
    return out;
}

// The regressor series for the per-phase fits: smoothed (or raw) counts,
// optionally lagged so day d of the response is paired with day d - lag of
// the counts.
inline DailySeries fit_regressor(const CaseStage& cs, const PipelineConfig& cfg) {
    DailySeries x = cfg.raw_counts_regressor ? cs.counts : cs.counts_sma;
    if (cfg.case_lag != 0) {
        if (x.contiguous()) {
            x.start_day += cfg.case_lag;
        } else {
            for (int& d : x.days) d += cfg.case_lag;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Validation.

struct FileCheck {
    std::string name;
    std::string path;
    bool configured = false;
    bool required = false;
    bool ok = true;
    std::size_t rows = 0;
    std::string first_date, last_date;
    std::vector<std::string> notes;
};

struct ValidationReport {
    std::vector<FileCheck> files;
    std::vector<std::string> rejected_sensors;  // "mode:id rate"
    bool ok = true;

    std::string text() const {
        std::ostringstream os;
        for (const auto& f : files) {
            os << f.name << ": ";
            if (!f.configured) {
                os << (f.required ? "MISSING (required)" : "not configured") << "\n";
            } else if (!f.ok) {
                os << f.path << ", FAILED\n";
            } else {
                os << f.path << ", " << f.rows << " rows";
                if (!f.first_date.empty()) os << ", " << f.first_date << " .. " << f.last_date;
                os << "\n";
            }
            for (const auto& n : f.notes) os << "  - " << n << "\n";
        }
        if (!rejected_sensors.empty()) {
            os << "rejected sensors:\n";
            for (const auto& s : rejected_sensors) os << "  - " << s << "\n";
        }
        os << (ok ? "ok" : "NOT OK") << "\n";
        return os.str();
    }
};

// Loads every configured input through its regular reader, so validation
// failures carry the same line-numbered messages a run would produce.  A
// required input that is not configured at all is fatal; an unreadable or
// malformed file is reported per entry and flips the report to NOT OK.
inline ValidationReport validate_inputs(const PipelineConfig& cfg) {
    StudyCalendar cal = cfg.calendar();
    ValidationReport rep;
    auto date_span = [&](int first_day, int last_day) {
        return std::pair(format_date(cal.date_of(first_day)), format_date(cal.date_of(last_day)));
    };

    auto check = [&](const std::string& name, const std::string& path, bool required,
                     auto&& loader) {
        FileCheck fc;
        fc.name = name;
        fc.path = path;
        fc.required = required;
        fc.configured = !path.empty();
        if (!fc.configured) {
            if (required) {
                rep.ok = false;
                rep.files.push_back(fc);
                raise(Errc::io_error, "required input '" + name + "' is not configured");
            }
            rep.files.push_back(fc);
            return;
        }
        try {
            loader(fc);
        } catch (const Error& e) {
            fc.ok = false;
            fc.notes.push_back(e.what());
        }
        if (!fc.ok) rep.ok = false;
        rep.files.push_back(fc);
    };

    check("cases", cfg.cases, true, [&](FileCheck& fc) {
        DailySeries s = load_cases(cfg.cases, cal);
        fc.rows = s.size();
        auto [a, b] = date_span(s.first_day(), s.last_day());
        fc.first_date = a;
        fc.last_date = b;
        if (!s.contiguous() || s.first_day() != 1 || s.last_day() != cfg.horizon) {
            fc.ok = false;
            fc.notes.push_back("does not cover every study day exactly once");
        }
    });

    check("contacts", cfg.contacts, true, [&](FileCheck& fc) {
        std::size_t collapsed = 0;
        std::vector<ContactDay> days = load_contacts(cfg.contacts, cal, &collapsed);
        std::size_t pts = 0;
        for (const auto& d : days) pts += d.points.size();
        fc.rows = pts;
        if (!days.empty()) {
            auto [a, b] = date_span(days.front().day, days.back().day);
            fc.first_date = a;
            fc.last_date = b;
        }
        if (collapsed)
            fc.notes.push_back(std::to_string(collapsed) + " duplicate location row(s) collapsed");
    });

    auto check_mobility = [&](const std::string& name, const std::string& path) {
        check(name, path, true, [&](FileCheck& fc) {
            MobilityData md = load_mobility(name, path, cal, cfg.missing_ceiling);
            fc.rows = md.series.records.size();
            if (!md.series.records.empty()) {
                int lo = md.series.records.front().day;
                int hi = md.series.records.back().day;
                fc.first_date = format_date(cal.date_of(lo));
                fc.last_date = format_date(cal.date_of(hi));
            }
            for (const auto& [id, rate] : md.missing_rate)
                if (rate > 0.0)
                    fc.notes.push_back(id + " missing rate " + fmt_num(rate) +
                                       (rate > cfg.missing_ceiling ? " (rejected)" : ""));
            for (const auto& id : md.rejected)
                rep.rejected_sensors.push_back(name + ":" + id + " rate " +
                                               fmt_num(md.missing_rate.at(id)));
            if (md.left_missing)
                fc.notes.push_back(std::to_string(md.left_missing) +
                                   " cell(s) not fillable from week neighbours");
        });
    };
    check_mobility("subway", cfg.subway);
    check_mobility("traffic", cfg.traffic);

    check("holidays", cfg.holidays, false, [&](FileCheck& fc) {
        fc.rows = load_holidays(cfg.holidays).size();
    });
    check("survey", cfg.survey, false, [&](FileCheck& fc) {
        auto pts = load_survey(cfg.survey, cal);
        fc.rows = pts.size();
        std::set<std::string> metrics;
        for (const auto& p : pts) metrics.insert(p.metric);
        std::string joined;
        for (const auto& m : metrics) joined += (joined.empty() ? "" : ", ") + m;
        fc.notes.push_back("metrics: " + joined);
    });
    check("policy", cfg.policy, true, [&](FileCheck& fc) {
        const auto table = cfg.policy_indicators.empty()
                               ? default_indicator_table()
                               : load_indicator_table(cfg.policy_indicators);
        fc.rows = load_policy_records(cfg.policy, table).size();
    });
    check("policy_indicators", cfg.policy_indicators, false, [&](FileCheck& fc) {
        fc.rows = load_indicator_table(cfg.policy_indicators).size();
    });

    return rep;
}

// ---------------------------------------------------------------------------
// Output writers.

namespace detail {

// Tracks files written by the current run so a failing stage can take its
// partial bundle down with it.
struct Bundle {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> written;

    explicit Bundle(const std::string& out) : dir(out) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) raise(Errc::io_error, "cannot create output directory '" + out + "'");
    }

    std::string file(const std::string& name) {
        written.push_back(dir / name);
        return (dir / name).string();
    }

    void discard() {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        written.clear();
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : written) out.push_back(p.filename().string());
        return out;
    }
};

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) raise(Errc::io_error, "write failed on '" + path + "'");
}

inline ordered_json segmentation_json(const Segmentation& seg) {
    ordered_json j;
    j["breaks"] = seg.breaks;
    j["segment_means"] = seg.segment_means;
    j["ssr"] = seg.ssr;
    j["m_selected"] = seg.m_selected;
    ordered_json intervals = ordered_json::array();
    for (std::size_t i = 0; i < seg.intervals.size(); ++i)
        intervals.push_back({{"break", seg.breaks[i]},
                             {"low", seg.intervals[i].low},
                             {"high", seg.intervals[i].high}});
    j["intervals"] = intervals;
    ordered_json trace = ordered_json::array();
    for (const auto& [m, bic] : seg.criterion_trace) trace.push_back({{"m", m}, {"bic", bic}});
    j["criterion_trace"] = trace;
    j["method"] = seg.method;
    j["ssr_floor_hit"] = seg.ssr_floor_hit;
    j["unstable_ci"] = seg.unstable_ci;
    j["ci_discarded"] = seg.ci_discarded;
    return j;
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? fmt_num(*v) : std::string();
}

}  // namespace detail

inline void write_cases_sma_csv(const std::string& path, const CaseStage& cs,
                                const StudyCalendar& cal) {
    CsvWriter w(path);
    w.row({"day", "date", "cases", "cases_sma"});
    for (std::size_t i = 0; i < cs.counts.size(); ++i) {
        int day = cs.counts.day_at(i);
        w.row({std::to_string(day), format_date(cal.date_of(day)),
               detail::opt_cell(cs.counts.values[i]), detail::opt_cell(cs.counts_sma.at_day(day))});
    }
    w.close();
}

inline void write_dispersion_csv(const std::string& path, const GeoStage& gs) {
    CsvWriter w(path);
    w.row({"day", "d_g_km", "d_h_km", "momentum_km", "momentum_sma_km", "regime"});
    std::map<int, const DispersionPoint*> by_day;
    for (const auto& p : gs.disp.points) by_day[p.day] = &p;
    const DailySeries& raw = gs.disp.momentum_raw;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        int day = raw.day_at(i);
        auto it = by_day.find(day);
        auto sma = gs.disp.momentum_sma.at_day(day);
        std::string regime;
        if (sma) regime = *sma > 0.0 ? "peak" : "expansion-contraction";
        if (it != by_day.end()) {
            const DispersionPoint& p = *it->second;
            w.row({std::to_string(day), fmt_num(p.d_g), fmt_num(p.d_h), fmt_num(p.momentum),
                   detail::opt_cell(sma), regime});
        } else {
            w.row({std::to_string(day), "", "", "", detail::opt_cell(sma), regime});
        }
    }
    w.close();
}

inline void write_phases_json(const std::string& path, const PhaseTimeline& tl,
                              const StudyCalendar& cal) {
    ordered_json arr = ordered_json::array();
    for (const Phase& p : tl.phases) {
        ordered_json j;
        j["kind"] = phase_kind_name(p.label.kind);
        j["wave"] = p.label.wave;
        j["start_day"] = p.start_day;
        j["end_day"] = p.end_day;
        j["start_date"] = format_date(cal.date_of(p.start_day));
        j["end_date"] = format_date(cal.date_of(p.end_day));
        j["label"] = phase_name(p.label);
        arr.push_back(j);
    }
    detail::write_json(path, arr);
}

inline void write_phases_csv(const std::string& path, const PhaseTimeline& tl,
                             const StudyCalendar& cal) {
    CsvWriter w(path);
    w.row({"label", "kind", "wave", "start_day", "end_day", "start_date", "end_date"});
    for (const Phase& p : tl.phases)
        w.row({phase_name(p.label), phase_kind_name(p.label.kind), std::to_string(p.label.wave),
               std::to_string(p.start_day), std::to_string(p.end_day),
               format_date(cal.date_of(p.start_day)), format_date(cal.date_of(p.end_day))});
    w.close();
}

inline void write_phase_fits_csv(const std::string& path, const PhaseFitTable& table) {
    CsvWriter w(path);
    w.row({"phase", "mode", "start_day", "end_day", "n", "beta0", "se0", "t0", "p0", "sig0",
           "beta1", "se1", "t1", "p1", "sig1", "r2", "adj_r2", "f_stat", "sig_f", "exact_fit",
           "note"});
    for (const PhaseFitRow& r : table.rows) {
        if (!r.ok) {
            w.row({phase_name(r.label), r.mode, std::to_string(r.start_day),
                   std::to_string(r.end_day), std::to_string(r.fit.n), "", "", "", "", "", "", "",
                   "", "", "", "", "", "", "", "", r.note});
            continue;
        }
        const OlsFit& f = r.fit;
        w.row({phase_name(r.label), r.mode, std::to_string(r.start_day),
               std::to_string(r.end_day), std::to_string(f.n), fmt_num(f.beta0), fmt_num(f.se0),
               fmt_num(f.t0), fmt_num(f.p0), significance_stars(f.p0, f.exact_fit),
               fmt_num(f.beta1), fmt_num(f.se1), fmt_num(f.t1), fmt_num(f.p1),
               significance_stars(f.p1, f.exact_fit), fmt_num(f.r2), fmt_num(f.adj_r2),
               fmt_num(f.f_stat), fmt_num(f.sig_f), f.exact_fit ? "1" : "0", r.note});
    }
    w.close();
}

inline void write_phase_fits_json(const std::string& path, const PhaseFitTable& table) {
    ordered_json arr = ordered_json::array();
    for (const PhaseFitRow& r : table.rows) {
        ordered_json j;
        j["phase"] = phase_name(r.label);
        j["mode"] = r.mode;
        j["start_day"] = r.start_day;
        j["end_day"] = r.end_day;
        j["ok"] = r.ok;
        if (!r.ok) {
            j["note"] = r.note;
        } else {
            const OlsFit& f = r.fit;
            j["n"] = f.n;
            j["beta0"] = f.beta0;
            j["se0"] = f.se0;
            j["t0"] = f.t0;
            j["p0"] = f.p0;
            j["beta1"] = f.beta1;
            j["se1"] = f.se1;
            j["t1"] = f.t1;
            j["p1"] = f.p1;
            j["r2"] = f.r2;
            j["adj_r2"] = f.adj_r2;
            j["f_stat"] = f.f_stat;
            j["sig_f"] = f.sig_f;
            j["exact_fit"] = f.exact_fit;
        }
        arr.push_back(j);
    }
    detail::write_json(path, arr);
}

inline void write_seasonality_json(const std::string& path,
                                   const std::vector<SeasonalityEntry>& entries) {
    ordered_json root;
    root["hour_reading"] =
        "break hour is the within-day position of the break in the hourly series; "
        "this reading of the day(hour) notation is an interpretation";
    ordered_json by_mode;
    for (const SeasonalityEntry& e : entries) {
        ordered_json j;
        if (!e.ok) {
            j["note"] = e.note;
        } else {
            std::vector<int> days;
            ordered_json positions = ordered_json::array();
            for (const auto& [d, h] : e.breaks) {
                days.push_back(d);
                positions.push_back({{"day", d}, {"hour", h}});
            }
            j["breaks"] = days;
            j["break_positions"] = positions;
            j["segment_means"] = e.seg.segment_means;
            j["ssr"] = e.seg.ssr;
            j["m_selected"] = e.seg.m_selected;
            ordered_json intervals = ordered_json::array();
            for (std::size_t i = 0; i < e.interval_days.size(); ++i)
                intervals.push_back({{"break", days[i]},
                                     {"low", e.interval_days[i].first},
                                     {"high", e.interval_days[i].second}});
            j["intervals"] = intervals;
            ordered_json trace = ordered_json::array();
            for (const auto& [m, bic] : e.seg.criterion_trace)
                trace.push_back({{"m", m}, {"bic", bic}});
            j["criterion_trace"] = trace;
            j["method"] = e.seg.method;
            j["n_points"] = e.n_points;
            j["points_per_day"] = e.points_per_day;
        }
        by_mode[e.mode][e.slice] = j;
    }
    root["modes"] = by_mode;
    detail::write_json(path, root);
}

inline void write_indices_csv(const std::string& path, const IndexSeries& idx) {
    CsvWriter w(path);
    w.row({"day", "government_response_index", "mobility_restriction_index"});
    for (std::size_t i = 0; i < idx.government.size(); ++i)
        w.row({std::to_string(i + 1), fmt_num(idx.government[i]), fmt_num(idx.mobility[i])});
    w.close();
}

// ---------------------------------------------------------------------------
// The full batch run lives in runner.hpp; figure composition in figures.hpp.

struct PipelineResult {
    CaseStage cases;
    GeoStage geo;
    PhaseTimeline timeline;
    PhaseFitTable fits;
    IndexSeries indices;
    std::vector<SeasonalityEntry> seasonality;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
};

}  // namespace epiphase
