#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"
#include "epiphase/regression.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

enum class PhaseKind { trigger, escalation, peak, de_escalation };

inline const char* phase_kind_name(PhaseKind k) {
    switch (k) {
        case PhaseKind::trigger: return "trigger";
        case PhaseKind::escalation: return "escalation";
        case PhaseKind::peak: return "peak";
        case PhaseKind::de_escalation: return "de-escalation";
    }
    return "?";
}

struct PhaseLabel {
    PhaseKind kind = PhaseKind::trigger;
    int wave = 1;
};

// Display name: escalations and peaks carry their wave number, the trigger
// and de-escalations read better without one.
inline std::string phase_name(const PhaseLabel& label) {
    std::string s = phase_kind_name(label.kind);
    if (label.kind == PhaseKind::escalation || label.kind == PhaseKind::peak)
        s += "-" + std::to_string(label.wave);
    return s;
}

struct Phase {
    PhaseLabel label;
    int start_day = 1;
    int end_day = 1;
};

struct DroppedTransition {
    int day = 0;
    std::string reason;
};

// Contiguous cover of days 1..horizon: each phase starts the day after the
// previous one ends.
struct PhaseTimeline {
    std::vector<Phase> phases;
    int horizon = 0;
    std::vector<DroppedTransition> dropped;

    void check() const {
        if (phases.empty()) raise(Errc::empty_series, "timeline has no phases");
        if (phases.front().start_day != 1) raise(Errc::invalid_argument, "timeline must start at day 1");
        if (phases.back().end_day != horizon)
            raise(Errc::invalid_argument, "timeline must end at the horizon");
        for (std::size_t i = 0; i < phases.size(); ++i) {
            if (phases[i].end_day < phases[i].start_day)
                raise(Errc::invalid_argument, "phase ends before it starts");
            if (i > 0 && phases[i].start_day != phases[i - 1].end_day + 1)
                raise(Errc::invalid_argument, "phases must be contiguous");
        }
    }
};

struct SynthesisConfig {
    int merge_window = 4;
    double slope_t_threshold = 2.0;
    int lookahead = 14;
    int min_segment = 7;
};

// Union of count breakpoints and geospatial transitions.  The count series
// is the primary signal: a geo transition within merge_window of any count
// break is folded into that break; geo transitions that survive are then
// deduplicated against each other the same way, keeping the earliest.
inline std::vector<int> fuse_transitions(std::vector<int> count_breaks,
                                         std::vector<int> geo_transitions,
                                         int merge_window = 4) {
    if (merge_window < 0) raise(Errc::invalid_argument, "merge_window must be non-negative");
    std::sort(count_breaks.begin(), count_breaks.end());
    count_breaks.erase(std::unique(count_breaks.begin(), count_breaks.end()), count_breaks.end());
    std::sort(geo_transitions.begin(), geo_transitions.end());

    std::vector<int> out = count_breaks;
    for (int g : geo_transitions) {
        bool merged = false;
        for (int kept : out)
            if (std::abs(g - kept) <= merge_window) {
                merged = true;
                break;
            }
        if (!merged) out.push_back(g);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

enum class SlopeClass { positive, negative, flat };

// Direction of the smoothed count trend within [start, end]: significant
// positive slope, significant negative slope, or flat.  Exact fits count as
// significant in the direction of the slope; fewer than three covered days
// cannot support a trend and read as flat.
inline SlopeClass classify_slope(const DailySeries& counts, int start, int end,
                                 double t_threshold) {
    std::vector<double> xs, ys;
    for (int d = start; d <= end; ++d) {
        auto v = counts.at_day(d);
        if (v) {
            xs.push_back(static_cast<double>(d));
            ys.push_back(*v);
        }
    }
    if (xs.size() < 3) return SlopeClass::flat;
    OlsFit fit = ols_fit(xs, ys);
    bool significant = fit.exact_fit ? fit.beta1 != 0.0 : std::fabs(fit.t1) >= t_threshold;
    if (!significant) return SlopeClass::flat;
    return fit.beta1 > 0.0 ? SlopeClass::positive : SlopeClass::negative;
}

}  // namespace detail

// Cuts the study window at the fused transitions and labels each segment.
// A transition day is the last day of the segment it closes.  Rules, applied
// left to right with the first segment fixed as the trigger:
//   - significant rising counts start (or extend) an escalation;
//   - a flat segment right after an escalation is that wave's peak, and
//     otherwise melts into the previous phase;
//   - significant falling counts propose a de-escalation, which stands only
//     if the mean smoothed momentum over the lookahead days after the
//     transition is <= 0 (the contact locations stopped spreading); a
//     rejected proposal melts into the previous phase;
//   - the wave number steps up when an escalation follows a peak or a
//     de-escalation.
// Every melt and every rejected proposal removes that segment's opening
// transition and is recorded in the returned timeline.  Transitions that
// fall outside (1, horizon) are discarded up front, and any segment shorter
// than min_segment has its closing transition dropped before labeling, so
// the result is a contiguous cover for arbitrary inputs.
inline PhaseTimeline build_timeline(std::vector<int> transitions, const DailySeries& counts_sma,
                                    const DailySeries& momentum_sma, const SynthesisConfig& cfg) {
    counts_sma.check();
    momentum_sma.check();
    if (cfg.min_segment < 1) raise(Errc::invalid_argument, "min_segment must be positive");
    if (cfg.lookahead < 1) raise(Errc::invalid_argument, "lookahead must be positive");
    int horizon = counts_sma.last_day();
    if (horizon < 1) raise(Errc::invalid_argument, "counts series ends before day 1");

    PhaseTimeline tl;
    tl.horizon = horizon;

    std::sort(transitions.begin(), transitions.end());
    transitions.erase(std::unique(transitions.begin(), transitions.end()), transitions.end());
    std::vector<int> cuts;
    for (int t : transitions) {
        if (t > 1 && t < horizon)
            cuts.push_back(t);
        else
            tl.dropped.push_back({t, "outside (1, horizon)"});
    }

    // Enforce the minimum segment length before labeling: merge a too-short
    // segment into its right neighbour (into its left one when it is last).
    for (bool again = true; again && !cuts.empty();) {
        again = false;
        int prev = 0;  // day before the first segment
        for (std::size_t i = 0; i <= cuts.size(); ++i) {
            int end = (i < cuts.size()) ? cuts[i] : horizon;
            if (end - prev < cfg.min_segment) {
                std::size_t victim = (i < cuts.size()) ? i : i - 1;
                tl.dropped.push_back({cuts[victim], "segment shorter than min_segment"});
                cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(victim));
                again = true;
                break;
            }
            prev = end;
        }
    }

    auto lookahead_ok = [&](int transition) {
        double sum = 0.0;
        int n = 0;
        for (int d = transition + 1; d <= transition + cfg.lookahead; ++d) {
            auto v = momentum_sma.at_day(d);
            if (v) {
                sum += *v;
                ++n;
            }
        }
        // No momentum data cannot confirm contraction, so the proposal fails.
        return n > 0 && sum / n <= 0.0;
    };

    int start = 1;
    for (std::size_t i = 0; i <= cuts.size(); ++i) {
        int end = (i < cuts.size()) ? cuts[i] : horizon;
        if (tl.phases.empty()) {
            tl.phases.push_back({{PhaseKind::trigger, 1}, start, end});
            start = end + 1;
            continue;
        }
        Phase& prev = tl.phases.back();
        detail::SlopeClass cls =
            detail::classify_slope(counts_sma, start, end, cfg.slope_t_threshold);
        switch (cls) {
            case detail::SlopeClass::positive:
                if (prev.label.kind == PhaseKind::escalation) {
                    tl.dropped.push_back({start - 1, "consecutive escalation segments merged"});
                    prev.end_day = end;
                } else {
                    int wave = prev.label.wave;
                    if (prev.label.kind == PhaseKind::peak ||
                        prev.label.kind == PhaseKind::de_escalation)
                        ++wave;
                    tl.phases.push_back({{PhaseKind::escalation, wave}, start, end});
                }
                break;
            case detail::SlopeClass::negative:
                if (!lookahead_ok(start - 1)) {
                    tl.dropped.push_back({start - 1, "momentum lookahead stayed positive"});
                    prev.end_day = end;
                } else if (prev.label.kind == PhaseKind::de_escalation) {
                    tl.dropped.push_back({start - 1, "consecutive de-escalation segments merged"});
                    prev.end_day = end;
                } else {
                    tl.phases.push_back({{PhaseKind::de_escalation, prev.label.wave}, start, end});
                }
                break;
            case detail::SlopeClass::flat:
                if (prev.label.kind == PhaseKind::escalation) {
                    tl.phases.push_back({{PhaseKind::peak, prev.label.wave}, start, end});
                } else {
                    tl.dropped.push_back({start - 1, "flat segment absorbed"});
                    prev.end_day = end;
                }
                break;
        }
        start = end + 1;
    }
    tl.check();
    return tl;
}

}  // namespace epiphase
