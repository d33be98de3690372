#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "epiphase/pipeline.hpp"
#include "epiphase/svg.hpp"

namespace epiphase {

namespace detail {

inline void write_svg(const std::string& path, const svgplot::Canvas& canvas) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");
    out << canvas.render();
    if (!out) raise(Errc::io_error, "write failed on '" + path + "'");
}

inline const char* phase_band_color(PhaseKind k) {
    switch (k) {
        case PhaseKind::trigger: return "#aebde0";
        case PhaseKind::escalation: return "#f0b4b4";
        case PhaseKind::peak: return "#e59191";
        case PhaseKind::de_escalation: return "#b5d9b5";
    }
    return "#cccccc";
}

// Polyline of a daily series, split at gaps.
inline void series_line(svgplot::Canvas& c, const svgplot::Axes& ax, const DailySeries& s,
                        const std::string& color, double width = 1.5) {
    std::vector<std::pair<double, double>> run;
    auto flush = [&] {
        if (run.size() > 1) c.polyline(run, color, width);
        else if (run.size() == 1) c.circle(run[0].first, run[0].second, width, color);
        run.clear();
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.values[i]) {
            flush();
            continue;
        }
        int day = s.day_at(i);
        if (!run.empty() && i > 0 && s.day_at(i - 1) != day - 1) flush();
        run.emplace_back(ax.X(day), ax.Y(*s.values[i]));
    }
    flush();
}

inline double series_max(const DailySeries& s, double fallback = 1.0) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : s.values)
        if (v) m = std::max(m, *v);
    return std::isfinite(m) ? m : fallback;
}

inline void legend_entry(svgplot::Canvas& c, double x, double y, const std::string& color,
                         const std::string& label) {
    c.line(x, y - 3.5, x + 18, y - 3.5, color, 2.5);
    c.text(x + 23, y, label, 10, "start", "#333333");
}

inline void phase_bands(svgplot::Canvas& c, const svgplot::Axes& ax, const PhaseTimeline& tl) {
    for (const Phase& p : tl.phases) {
        double x0 = ax.X(p.start_day);
        double x1 = ax.X(p.end_day);
        c.rect(x0, ax.top, x1 - x0, ax.height, phase_band_color(p.label.kind), 0.28);
        c.text((x0 + x1) / 2, ax.top + 12, phase_name(p.label), 9, "middle", "#555555");
    }
}

}  // namespace detail

// Counts with detected level shifts on top, dispersion momentum below.
inline void write_fig1(const std::string& path, const CaseStage& cs, const GeoStage& gs,
                       const PhaseTimeline& tl) {
    svgplot::Canvas c(940, 600);
    int horizon = std::max(cs.counts.last_day(), tl.horizon);

    svgplot::Axes top{70, 48, 830, 220, 1.0, static_cast<double>(horizon), 0.0,
                      detail::series_max(cs.counts) * 1.08};
    top.frame(c, "Daily confirmed cases and level shifts", "", "cases per day");
    detail::phase_bands(c, top, tl);
    detail::series_line(c, top, cs.counts, "#9aa7b8", 1.0);
    detail::series_line(c, top, cs.counts_sma, "#1f4e9c", 2.2);
    for (std::size_t i = 0; i < cs.seg.breaks.size(); ++i) {
        int b = cs.seg.breaks[i];
        if (i < cs.seg.intervals.size()) {
            const BreakInterval& iv = cs.seg.intervals[i];
            c.rect(top.X(iv.low), top.top, top.X(iv.high) - top.X(iv.low), top.height, "#c0392b",
                   0.10);
        }
        c.line(top.X(b), top.top, top.X(b), top.top + top.height, "#c0392b", 1.3, "5,3");
        c.text(top.X(b) + 3, top.top + 26, std::to_string(b), 9, "start", "#c0392b");
    }
    detail::legend_entry(c, top.left + 8, top.top + top.height - 22, "#9aa7b8", "daily cases");
    detail::legend_entry(c, top.left + 8, top.top + top.height - 8, "#1f4e9c", "7-day SMA");

    const DailySeries& sma = gs.disp.momentum_sma;
    double mmax = 1.0;
    for (const auto& v : sma.values)
        if (v) mmax = std::max(mmax, std::abs(*v));
    svgplot::Axes bot{70, 330, 830, 200, 1.0, static_cast<double>(horizon), -mmax * 1.15,
                      mmax * 1.15};
    bot.frame(c, "Geospatial dispersion momentum", "study day", "km");
    double day_w = bot.width / (bot.x1 - bot.x0);
    for (std::size_t i = 0; i < sma.size(); ++i) {
        if (!sma.values[i] || *sma.values[i] <= 0.0) continue;
        double x = bot.X(sma.day_at(i));
        c.rect(x - day_w / 2, bot.Y(*sma.values[i]), day_w,
               bot.Y(0.0) - bot.Y(*sma.values[i]), "#d98a2b", 0.35);
    }
    c.line(bot.X(bot.x0), bot.Y(0.0), bot.X(bot.x1), bot.Y(0.0), "#888888", 1.0);
    detail::series_line(c, bot, sma, "#7a3ca8", 2.0);
    for (int t : gs.transitions)
        c.line(bot.X(t), bot.top, bot.X(t), bot.top + bot.height, "#2c8a5f", 1.3, "5,3");
    detail::legend_entry(c, bot.left + 8, bot.top + 16, "#7a3ca8", "momentum (7-day SMA)");
    c.text(bot.left + 8, bot.top + 30, "shaded: dispersion above the day-ahead Hausdorff reach",
           9, "start", "#777777");

    detail::write_svg(path, c);
}

// Per-phase scatter of reduction against the count regressor, with the
// fitted lines from the phase fit table.
inline void write_fig2(const std::string& path, const PhaseFitTable& fits,
                       const std::map<std::string, DailySeries>& reduction_by_mode,
                       const DailySeries& regressor, const PhaseTimeline& tl) {
    const int cols = 3;
    int rows = static_cast<int>((tl.phases.size() + cols - 1) / cols);
    if (rows < 1) rows = 1;
    const double panel_w = 255, panel_h = 180, gap_x = 55, gap_y = 62;
    svgplot::Canvas c(cols * (panel_w + gap_x) + 60, rows * (panel_h + gap_y) + 70);

    const std::map<std::string, std::string> mode_color = {{"subway", "#1f4e9c"},
                                                           {"traffic", "#c0392b"}};

    for (std::size_t pi = 0; pi < tl.phases.size(); ++pi) {
        const Phase& ph = tl.phases[pi];
        // collect points per mode
        std::map<std::string, std::vector<std::pair<double, double>>> pts;
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& [mode, red] : reduction_by_mode) {
            for (int d = ph.start_day; d <= ph.end_day; ++d) {
                auto x = regressor.at_day(d);
                auto y = red.at_day(d);
                if (!x || !y) continue;
                pts[mode].emplace_back(*x, *y);
                xmin = std::min(xmin, *x);
                xmax = std::max(xmax, *x);
                ymin = std::min(ymin, *y);
                ymax = std::max(ymax, *y);
            }
        }
        if (xmin > xmax) {
            xmin = 0;
            xmax = 1;
            ymin = 0;
            ymax = 1;
        }
        if (xmax - xmin < 1e-9) {
            xmin -= 0.5;
            xmax += 0.5;
        }
        if (ymax - ymin < 1e-9) {
            ymin -= 0.05;
            ymax += 0.05;
        }
        double pad_x = (xmax - xmin) * 0.06, pad_y = (ymax - ymin) * 0.10;
        svgplot::Axes ax{60 + (pi % cols) * (panel_w + gap_x),
                         44 + (pi / cols) * (panel_h + gap_y),
                         panel_w,
                         panel_h,
                         xmin - pad_x,
                         xmax + pad_x,
                         ymin - pad_y,
                         ymax + pad_y};
        std::string stars;
        for (const PhaseFitRow& r : fits.rows)
            if (r.mode == "subway" && r.start_day == ph.start_day && r.ok)
                stars = significance_stars(r.fit.p1, r.fit.exact_fit);
        bool bottom_row = pi / cols == static_cast<std::size_t>(rows - 1);
        ax.frame(c, phase_name(ph.label) + (stars.empty() ? "" : " " + stars),
                 bottom_row ? "case count (regressor)" : "", pi % cols == 0 ? "reduction" : "");
        for (const auto& [mode, v] : pts) {
            const std::string& col = mode_color.count(mode) ? mode_color.at(mode) : "#555555";
            for (const auto& [x, y] : v) c.circle(ax.X(x), ax.Y(y), 2.2, col, 0.65);
        }
        for (const PhaseFitRow& r : fits.rows) {
            if (r.start_day != ph.start_day || !r.ok) continue;
            const std::string& col =
                mode_color.count(r.mode) ? mode_color.at(r.mode) : "#555555";
            double ya = r.fit.beta0 + r.fit.beta1 * (xmin);
            double yb = r.fit.beta0 + r.fit.beta1 * (xmax);
            c.line(ax.X(xmin), ax.Y(std::clamp(ya, ax.y0, ax.y1)), ax.X(xmax),
                   ax.Y(std::clamp(yb, ax.y0, ax.y1)), col, 1.8);
        }
    }
    double ly = rows * (panel_h + gap_y) + 40;
    detail::legend_entry(c, 60, ly, "#1f4e9c", "subway");
    detail::legend_entry(c, 150, ly, "#c0392b", "road traffic");
    detail::write_svg(path, c);
}

namespace detail {

inline DailySeries display_reduction(const MobilityData& md, const StudyCalendar& cal,
                                     const SliceSpec& spec, const PipelineConfig& cfg) {
    DailySeries r = slice_reduction_daily(md, cal, spec, cfg.horizon, cfg.sma_window,
                                          cfg.smooth_before_reduction);
    if (!cfg.smooth_before_reduction) r = simple_moving_average(r, cfg.sma_window);
    return r;
}

}  // namespace detail

// Sliced reduction series per mode with that mode's all-week intervention
// days marked.
inline void write_fig3(const std::string& path, const MobilityData& subway,
                       const MobilityData& traffic, const StudyCalendar& cal,
                       const PipelineConfig& cfg,
                       const std::vector<SeasonalityEntry>& seasonality) {
    svgplot::Canvas c(940, 620);
    const std::vector<std::pair<std::string, std::string>> slice_colors = {
        {"all_week_all_hours", "#1f4e9c"},
        {"weekday_commute_hours", "#d98a2b"},
        {"weekend_all_hours", "#2c8a5f"},
        {"all_week_afternoon_off_peak", "#7a3ca8"},
    };
    auto slice_by_name = [&](const std::string& name) {
        for (const SliceSpec& s : seasonality_slices(cfg))
            if (s.name == name) return s;
        raise(Errc::invalid_argument, "unknown slice '" + name + "'");
    };

    double top_y = 48;
    for (const MobilityData* md : {&subway, &traffic}) {
        std::map<std::string, DailySeries> lines;
        double ymax = 0.05;
        for (const auto& [name, color] : slice_colors) {
            DailySeries r = detail::display_reduction(*md, cal, slice_by_name(name), cfg);
            ymax = std::max(ymax, detail::series_max(r));
            lines[name] = std::move(r);
        }
        svgplot::Axes ax{70, top_y, 830, 210, 1.0, static_cast<double>(cfg.horizon),
                         std::min(0.0, -0.02), ymax * 1.12};
        ax.frame(c, md->mode + " reduction by slice",
                 md == &traffic ? "study day" : "", "reduction");
        for (const auto& [name, color] : slice_colors)
            detail::series_line(c, ax, lines[name], color, 1.7);
        for (const SeasonalityEntry& e : seasonality) {
            if (e.mode != md->mode || e.slice != "all_week_all_hours" || !e.ok) continue;
            for (const auto& [day, hour] : e.breaks) {
                c.line(ax.X(day), ax.top, ax.X(day), ax.top + ax.height, "#777777", 1.1, "4,3");
                c.text(ax.X(day) + 2, ax.top + 12, std::to_string(day), 8, "start", "#777777");
            }
        }
        double lx = ax.left + 8;
        for (const auto& [name, color] : slice_colors) {
            detail::legend_entry(c, lx, ax.top + ax.height - 8, color, name);
            lx += 8.0 * name.size() + 40;
        }
        top_y += 285;
    }
    detail::write_svg(path, c);
}

// Survey responses over the subway reduction curve.  Survey points are drawn
// exactly where they were collected, with no interpolation.
inline void write_fig4(const std::string& path, const DailySeries& subway_reduction,
                       const std::vector<SurveyPoint>& survey, const StudyCalendar& cal) {
    (void)cal;
    svgplot::Canvas c(940, 360);
    int horizon = subway_reduction.last_day();
    svgplot::Axes ax{70, 48, 790, 240, 1.0, static_cast<double>(horizon), 0.0,
                     std::max(0.05, detail::series_max(subway_reduction)) * 1.15};
    ax.frame(c, "Survey responses and subway reduction", "study day", "reduction");
    detail::series_line(c, ax, subway_reduction, "#1f4e9c", 2.0);

    svgplot::Axes right = ax;
    right.y0 = 0.0;
    right.y1 = 100.0;
    for (double t : svgplot::nice_ticks(0.0, 100.0)) {
        double yy = right.Y(t);
        c.line(ax.left + ax.width, yy, ax.left + ax.width + 4, yy, "#666666", 1.0);
        c.text(ax.left + ax.width + 7, yy + 3.5, svgplot::tick_label(t), 10, "start", "#555555");
    }
    c.text(ax.left + ax.width + 44, ax.top + ax.height / 2, "per cent", 11, "middle", "#333333",
           true);

    const std::map<std::string, std::string> metric_color = {{"risk_perception", "#7a3ca8"},
                                                             {"mask_use", "#2c8a5f"}};
    std::map<std::string, bool> seen;
    for (const SurveyPoint& p : survey) {
        if (p.day < 1 || p.day > horizon) continue;
        auto it = metric_color.find(p.metric);
        const std::string& col = it != metric_color.end() ? it->second : "#888888";
        c.circle(right.X(p.day), right.Y(p.value), 3.2, col, 0.9);
        seen[p.metric] = true;
    }
    double ly = ax.top + 16;
    detail::legend_entry(c, ax.left + 8, ly, "#1f4e9c", "subway reduction (7-day SMA)");
    for (const auto& [metric, on] : seen) {
        ly += 14;
        auto it = metric_color.find(metric);
        detail::legend_entry(c, ax.left + 8, ly,
                             it != metric_color.end() ? it->second : "#888888", metric);
    }
    detail::write_svg(path, c);
}

// Government response and mobility restriction composites.
inline void write_figs1(const std::string& path, const IndexSeries& idx) {
    svgplot::Canvas c(940, 340);
    int horizon = static_cast<int>(idx.government.size());
    svgplot::Axes ax{70, 48, 830, 230, 1.0, static_cast<double>(std::max(horizon, 2)), 0.0,
                     100.0};
    ax.frame(c, "Policy stringency composites", "study day", "index (0-100)");
    auto to_series = [&](const std::vector<double>& v, const std::string& label) {
        DailySeries s;
        s.start_day = 1;
        s.label = label;
        for (double x : v) s.values.emplace_back(x);
        return s;
    };
    detail::series_line(c, ax, to_series(idx.government, "government"), "#1f4e9c", 2.0);
    detail::series_line(c, ax, to_series(idx.mobility, "mobility"), "#c0392b", 2.0);
    detail::legend_entry(c, ax.left + 8, ax.top + 16, "#1f4e9c", "government response");
    detail::legend_entry(c, ax.left + 8, ax.top + 30, "#c0392b", "mobility restriction");
    detail::write_svg(path, c);
}

}  // namespace epiphase
