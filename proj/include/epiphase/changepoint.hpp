#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "epiphase/errors.hpp"
#include "epiphase/rng.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

struct BreakConfig {
    int max_breaks = 8;
    int min_segment = 7;
    int bootstrap_reps = 1000;
    double ci_level = 0.95;
    std::uint64_t seed = 0;
};

struct BreakInterval {
    int low = 0;
    int high = 0;
};

// Result of segmenting a series into piecewise-constant pieces.  `breaks`
// holds the day index of the last day of each segment except the final one;
// segment k runs (breaks[k-1], breaks[k]].  Confidence intervals are attached
// separately by bootstrap_ci and are empty until then.
struct Segmentation {
    std::vector<int> breaks;
    std::vector<double> segment_means;
    double ssr = 0.0;
    int m_selected = 0;
    std::vector<BreakInterval> intervals;
    std::vector<std::pair<int, double>> criterion_trace;  // (m, BIC)
    std::string method = "dp-exact";
    bool ssr_floor_hit = false;   // BIC evaluated at the SSR floor
    bool unstable_ci = false;     // more than 10% of bootstrap replicates discarded
    int ci_discarded = 0;
};

// Sum of squared residuals of y[i..j] (0-based, inclusive) about the segment
// mean.  Two passes: mean first, then squared deviations, accumulated left to
// right.  This is the reference cost; the DP uses a faster prefix-sum form
// internally but reports SSR recomputed through here so the value does not
// depend on the search strategy.
inline double segment_ssr(const std::vector<double>& y, std::size_t i, std::size_t j) {
    if (i > j || j >= y.size()) raise(Errc::out_of_range, "segment bounds outside series");
    double mean = 0.0;
    for (std::size_t k = i; k <= j; ++k) mean += y[k];
    mean /= static_cast<double>(j - i + 1);
    double ssr = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
        double d = y[k] - mean;
        ssr += d * d;
    }
    return ssr;
}

inline double segment_mean(const std::vector<double>& y, std::size_t i, std::size_t j) {
    double mean = 0.0;
    for (std::size_t k = i; k <= j; ++k) mean += y[k];
    return mean / static_cast<double>(j - i + 1);
}

// Extracts a gap-free value vector; changepoint detection has no notion of
// absent observations, so any gap is the caller's problem to fill first.
inline std::vector<double> dense_values(const DailySeries& s) {
    s.check();
    std::vector<double> y;
    y.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.values[i])
            raise(Errc::missing_data, "series '" + s.label + "' has a gap at day " +
                                          std::to_string(s.day_at(i)));
        y.push_back(*s.values[i]);
    }
    return y;
}

namespace detail {

// Exact dynamic program for the best split of y into `segments` pieces, each
// at least min_seg long, minimizing total within-segment SSR.  Costs come
// from prefix sums, so one (first, last) evaluation is O(1) and the whole
// program is O(segments * n^2).  G[k][i] is the optimal cost of covering
// y[i..n-1] with k segments; A[k][i] the first-segment end realizing it.
// Ties keep the earliest end (strict improvement only), which makes the
// reconstructed break vector the lexicographically smallest optimum.
struct SegmentDp {
    std::vector<double> pre1, pre2;
    std::size_t n = 0;

    explicit SegmentDp(const std::vector<double>& y) : n(y.size()) {
        pre1.assign(n + 1, 0.0);
        pre2.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            pre1[i + 1] = pre1[i] + y[i];
            pre2[i + 1] = pre2[i] + y[i] * y[i];
        }
    }

    double cost(std::size_t i, std::size_t j) const {  // inclusive bounds
        double s1 = pre1[j + 1] - pre1[i];
        double s2 = pre2[j + 1] - pre2[i];
        double c = s2 - s1 * s1 / static_cast<double>(j - i + 1);
        return c < 0.0 ? 0.0 : c;  // guards tiny negative round-off
    }

    // Suffix tables: g[k][i] is the minimum cost of covering y[i..n-1] with
    // exactly k segments of at least ms points each, a[k][i] the end of the
    // first of those segments.  Level k reads only level k-1, so building
    // all levels once and backtracking per k gives the same answers as a
    // fresh table per call, at a fraction of the work.
    mutable std::vector<std::vector<double>> g;
    mutable std::vector<std::vector<std::size_t>> a;
    mutable std::size_t levels_ready = 0;
    mutable std::size_t ms_ready = 0;

    void prepare(std::size_t k_total, std::size_t ms) const {
        if (ms == ms_ready && k_total <= levels_ready) return;
        const double inf = std::numeric_limits<double>::infinity();
        g.assign(k_total + 1, std::vector<double>(n + 1, inf));
        a.assign(k_total + 1, std::vector<std::size_t>(n + 1, 0));
        for (std::size_t i = 0; i + ms <= n; ++i) g[1][i] = cost(i, n - 1);
        for (std::size_t k = 2; k <= k_total; ++k) {
            for (std::size_t i = 0; i + k * ms <= n; ++i) {
                double best = inf;
                std::size_t best_j = 0;
                // first segment [i..j], remainder needs (k-1)*ms points
                for (std::size_t j = i + ms - 1; j + 1 + (k - 1) * ms <= n; ++j) {
                    double c = cost(i, j) + g[k - 1][j + 1];
                    if (c < best) {
                        best = c;
                        best_j = j;
                    }
                }
                g[k][i] = best;
                a[k][i] = best_j;
            }
        }
        levels_ready = k_total;
        ms_ready = ms;
    }

    // Returns the 0-based last indices of segments 1..segments-1.
    std::vector<std::size_t> solve(int segments, int min_seg) const {
        std::size_t k_total = static_cast<std::size_t>(segments);
        std::size_t ms = static_cast<std::size_t>(min_seg);
        prepare(k_total, ms);
        std::vector<std::size_t> ends;
        std::size_t start = 0;
        for (std::size_t k = k_total; k >= 2; --k) {
            std::size_t j = a[k][start];
            ends.push_back(j);
            start = j + 1;
        }
        return ends;
    }
};

inline Segmentation build_result(const DailySeries& s, const std::vector<double>& y,
                                 const std::vector<std::size_t>& ends) {
    Segmentation r;
    r.m_selected = static_cast<int>(ends.size());
    for (std::size_t e : ends) r.breaks.push_back(s.day_at(e));
    std::size_t start = 0;
    double ssr = 0.0;
    for (std::size_t k = 0; k <= ends.size(); ++k) {
        std::size_t end = (k < ends.size()) ? ends[k] : y.size() - 1;
        r.segment_means.push_back(segment_mean(y, start, end));
        ssr += segment_ssr(y, start, end);
        start = end + 1;
    }
    r.ssr = ssr;
    return r;
}

}  // namespace detail

// Bayesian information criterion for a mean-shift model with m breaks: the
// free parameters are m+1 segment means, m break positions and the noise
// scale.  SSR/n is floored at 1e-12 so a perfect fit cannot drive the
// criterion to -infinity; hitting the floor is reported via the flag.
inline double bic_value(std::size_t n, double ssr, int m, bool* floor_hit = nullptr) {
    double per_n = ssr / static_cast<double>(n);
    const double floor = 1e-12;
    if (per_n < floor) {
        per_n = floor;
        if (floor_hit) *floor_hit = true;
    }
    return static_cast<double>(n) * std::log(per_n) +
           (2.0 * m + 1.0) * std::log(static_cast<double>(n));
}

// Optimal segmentation with exactly m breaks (m+1 segments).
inline Segmentation optimal_partition(const DailySeries& s, int m, const BreakConfig& cfg) {
    std::vector<double> y = dense_values(s);
    if (m < 0) raise(Errc::invalid_argument, "break count must be non-negative");
    if (cfg.min_segment < 1) raise(Errc::invalid_argument, "min_segment must be positive");
    std::size_t need = static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(cfg.min_segment);
    if (need > y.size())
        raise(Errc::insufficient_data, std::to_string(m) + " breaks with min_segment " +
                                           std::to_string(cfg.min_segment) + " need " +
                                           std::to_string(need) + " days, have " +
                                           std::to_string(y.size()));
    detail::SegmentDp dp(y);
    return detail::build_result(s, y, dp.solve(m + 1, cfg.min_segment));
}

// Break-count selection: solve the partition for every feasible m up to
// max_breaks, score each with BIC, keep the minimum.  Ties go to fewer
// breaks.  The full (m, BIC) trace is kept for inspection.
inline Segmentation select_breaks(const DailySeries& s, const BreakConfig& cfg) {
    std::vector<double> y = dense_values(s);
    if (cfg.max_breaks < 0) raise(Errc::invalid_argument, "max_breaks must be non-negative");
    if (cfg.min_segment < 1) raise(Errc::invalid_argument, "min_segment must be positive");
    if (static_cast<std::size_t>(cfg.min_segment) > y.size())
        raise(Errc::insufficient_data, "series shorter than one minimum segment");
    detail::SegmentDp dp(y);
    std::size_t ms = static_cast<std::size_t>(cfg.min_segment);
    std::size_t deepest = std::min(static_cast<std::size_t>(cfg.max_breaks) + 1, y.size() / ms);
    dp.prepare(deepest, ms);
    Segmentation best;
    double best_bic = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> trace;
    bool floor_hit = false;
    for (int m = 0; m <= cfg.max_breaks; ++m) {
        std::size_t need =
            static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(cfg.min_segment);
        if (need > y.size()) break;  // larger m only gets worse
        Segmentation cand = detail::build_result(s, y, dp.solve(m + 1, cfg.min_segment));
        double bic = bic_value(y.size(), cand.ssr, m, &floor_hit);
        trace.emplace_back(m, bic);
        if (bic < best_bic) {
            best_bic = bic;
            best = std::move(cand);
        }
    }
    best.criterion_trace = std::move(trace);
    best.ssr_floor_hit = floor_hit;
    return best;
}

// Percentile confidence intervals for the selected breaks via within-segment
// residual resampling.  Each replicate rebuilds the series from the fitted
// step function plus residuals drawn (with replacement) from the same
// segment, re-runs the partition at the selected m, and records the break
// days.  Replicate k draws from Rng::stream(seed, k), so results do not
// depend on scheduling.  Rank statistics use the nearest-rank rule.
// Each reported interval is widened, if needed, to contain its point
// estimate.  Replicates whose re-estimation fails are discarded; more than
// 10% discarded marks the result unstable.
inline void bootstrap_ci(Segmentation& seg, const DailySeries& s, const BreakConfig& cfg) {
    if (cfg.bootstrap_reps < 100)
        raise(Errc::invalid_argument, "bootstrap needs at least 100 replicates");
    if (cfg.ci_level <= 0.0 || cfg.ci_level >= 1.0)
        raise(Errc::invalid_argument, "confidence level must lie in (0, 1)");
    seg.method = "bootstrap-percentile";
    seg.intervals.clear();
    if (seg.m_selected == 0) return;

    std::vector<double> y = dense_values(s);
    std::size_t n = y.size();

    // Segment bounds as positions, from the reported break days.
    std::vector<std::size_t> bounds;  // last position of each segment
    {
        std::size_t pos = 0;
        for (int b : seg.breaks) {
            while (pos < n && s.day_at(pos) != b) ++pos;
            if (pos >= n) raise(Errc::invalid_argument, "break day not on the series axis");
            bounds.push_back(pos);
        }
        bounds.push_back(n - 1);
    }

    std::vector<double> fitted(n), resid(n);
    std::size_t start = 0;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        for (std::size_t i = start; i <= bounds[k]; ++i) {
            fitted[i] = seg.segment_means[k];
            resid[i] = y[i] - fitted[i];
        }
        start = bounds[k] + 1;
    }

    std::size_t m = static_cast<std::size_t>(seg.m_selected);
    std::vector<std::vector<int>> samples(m);
    int discarded = 0;
    std::vector<double> boot(n);
    for (int rep = 0; rep < cfg.bootstrap_reps; ++rep) {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep));
        std::size_t seg_start = 0;
        for (std::size_t k = 0; k < bounds.size(); ++k) {
            std::size_t len = bounds[k] - seg_start + 1;
            for (std::size_t i = seg_start; i <= bounds[k]; ++i)
                boot[i] = fitted[i] + resid[seg_start + rng.bounded(len)];
            seg_start = bounds[k] + 1;
        }
        try {
            detail::SegmentDp dp(boot);
            std::vector<std::size_t> ends = dp.solve(seg.m_selected + 1, cfg.min_segment);
            for (std::size_t k = 0; k < m; ++k)
                samples[k].push_back(s.day_at(ends[k]));
        } catch (const Error&) {
            ++discarded;
        }
    }
    seg.ci_discarded = discarded;
    seg.unstable_ci = discarded * 10 > cfg.bootstrap_reps;

    double alpha = 1.0 - cfg.ci_level;
    auto rank = [](const std::vector<int>& v, double p) {
        double r = std::ceil(p * static_cast<double>(v.size()));
        std::size_t idx = (r < 1.0) ? 0 : static_cast<std::size_t>(r) - 1;
        if (idx >= v.size()) idx = v.size() - 1;
        return v[idx];
    };
    for (std::size_t k = 0; k < m; ++k) {
        if (samples[k].empty())
            raise(Errc::insufficient_data, "no usable bootstrap replicates");
        std::sort(samples[k].begin(), samples[k].end());
        BreakInterval iv{rank(samples[k], alpha / 2.0), rank(samples[k], 1.0 - alpha / 2.0)};
        iv.low = std::min(iv.low, seg.breaks[k]);
        iv.high = std::max(iv.high, seg.breaks[k]);
        seg.intervals.push_back(iv);
    }
}

}  // namespace epiphase
