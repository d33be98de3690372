#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "epiphase/changepoint.hpp"
#include "epiphase/rng.hpp"
#include "helpers.hpp"

using namespace epiphase;
using testutil::series_of;

namespace {

// Independent reference: enumerate every placement of m breaks subject to
// the minimum segment length and keep the one with the lowest total SSR.
// Exponential in m, so only usable for small n; the point is that it shares
// no code with the dynamic program under test.
struct EnumBest {
    double ssr = std::numeric_limits<double>::infinity();
    std::vector<int> breaks;
};

void enum_rec(const std::vector<double>& y, int m, int min_seg, std::size_t start,
              double acc, std::vector<int>& chosen, EnumBest& best) {
    std::size_t n = y.size();
    if (m == 0) {
        if (n - start < static_cast<std::size_t>(min_seg)) return;
        double total = acc + segment_ssr(y, start, n - 1);
        if (total < best.ssr) {
            best.ssr = total;
            best.breaks = chosen;
        }
        return;
    }
    for (std::size_t end = start + min_seg - 1;
         end + static_cast<std::size_t>(m) * static_cast<std::size_t>(min_seg) < n; ++end) {
        chosen.push_back(static_cast<int>(end) + 1);  // break = 1-based day of segment end
        enum_rec(y, m - 1, min_seg, end + 1, acc + segment_ssr(y, start, end), chosen, best);
        chosen.pop_back();
    }
}

EnumBest enumerate_best(const std::vector<double>& y, int m, int min_seg) {
    EnumBest best;
    std::vector<int> chosen;
    enum_rec(y, m, min_seg, 0, 0.0, chosen, best);
    return best;
}

BreakConfig fixed_cfg(int min_segment) {
    BreakConfig cfg;
    cfg.min_segment = min_segment;
    cfg.bootstrap_reps = 0;
    return cfg;
}

}  // namespace

TEST_CASE("segment statistics on tiny inputs") {
    std::vector<double> y = {0.0, 10.0};
    CHECK(segment_ssr(y, 0, 1) == Catch::Approx(50.0));
    CHECK(segment_mean(y, 0, 1) == Catch::Approx(5.0));
    CHECK(segment_ssr(y, 0, 0) == Catch::Approx(0.0));
    std::vector<double> z = {1.0, 2.0, 3.0, 4.0};
    CHECK(segment_ssr(z, 0, 3) == Catch::Approx(5.0));
    CHECK(segment_ssr(z, 1, 2) == Catch::Approx(0.5));
}

TEST_CASE("a clean two-level series splits exactly at the level change") {
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) y.push_back(0.0);
    for (int i = 0; i < 20; ++i) y.push_back(10.0);
    Segmentation seg = optimal_partition(series_of(y), 1, fixed_cfg(5));
    REQUIRE(seg.breaks.size() == 1);
    CHECK(seg.breaks[0] == 20);
    CHECK(seg.ssr == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(seg.segment_means.size() == 2);
    CHECK(seg.segment_means[0] == Catch::Approx(0.0));
    CHECK(seg.segment_means[1] == Catch::Approx(10.0));
}

TEST_CASE("fixed-m partition matches exhaustive enumeration on random series") {
    Rng rng(424242);
    int done = 0;
    while (done < 60) {
        int n = 12 + static_cast<int>(rng.bounded(29));  // 12..40
        int m = 1 + static_cast<int>(rng.bounded(3));    // 1..3
        int min_seg = 3 + static_cast<int>(rng.bounded(3));
        if ((m + 1) * min_seg > n) continue;  // infeasible draw, resample
        ++done;
        std::vector<double> y;
        for (int i = 0; i < n; ++i) y.push_back(rng.normal(0.0, 1.0) + (i % 4 == 0 ? 2.0 : 0.0));

        EnumBest ref = enumerate_best(y, m, min_seg);
        Segmentation got = optimal_partition(series_of(y), m, fixed_cfg(min_seg));
        REQUIRE(std::isfinite(ref.ssr));
        CHECK(got.ssr == Catch::Approx(ref.ssr).margin(1e-9));
        CHECK(got.breaks == ref.breaks);
    }
}

TEST_CASE("an infeasible break count is rejected") {
    std::vector<double> y(10, 1.0);
    CHECK_THROWS_AS(optimal_partition(series_of(y), 2, fixed_cfg(5)), Error);  // needs 15 points
    CHECK_NOTHROW(optimal_partition(series_of(y), 1, fixed_cfg(5)));
}

TEST_CASE("criterion selection finds the planted break count") {
    Rng rng(9);
    std::vector<double> y;
    std::vector<double> levels = {0.0, 8.0, 3.0};
    for (int seg = 0; seg < 3; ++seg)
        for (int i = 0; i < 30; ++i) y.push_back(levels[seg] + rng.normal(0.0, 1.0));

    BreakConfig cfg;
    cfg.max_breaks = 6;
    cfg.min_segment = 7;
    cfg.bootstrap_reps = 0;
    Segmentation seg = select_breaks(series_of(y), cfg);
    CHECK(seg.m_selected == 2);
    REQUIRE(seg.breaks.size() == 2);
    CHECK(std::abs(seg.breaks[0] - 30) <= 1);
    CHECK(std::abs(seg.breaks[1] - 60) <= 1);
    // trace covers m = 0 .. max_breaks (all feasible here)
    CHECK(seg.criterion_trace.size() == 7);
}

TEST_CASE("criterion trace is reproducible by hand") {
    // constant series: adding breaks never helps, the penalty decides
    std::vector<double> y(30, 5.0);
    BreakConfig cfg;
    cfg.max_breaks = 2;
    cfg.min_segment = 5;
    cfg.bootstrap_reps = 0;
    Segmentation seg = select_breaks(series_of(y), cfg);
    CHECK(seg.m_selected == 0);
    CHECK(seg.ssr_floor_hit);
    double n = 30.0;
    double floor_bic = n * std::log(1e-12) + 1.0 * std::log(n);
    REQUIRE_FALSE(seg.criterion_trace.empty());
    CHECK(seg.criterion_trace[0].first == 0);
    CHECK(seg.criterion_trace[0].second == Catch::Approx(floor_bic));
}

TEST_CASE("a noisy step is still located to the day") {
    Rng rng(99);
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) y.push_back((i < 25 ? 0.0 : 12.0) + rng.normal(0.0, 1.5));
    Segmentation seg = optimal_partition(series_of(y), 1, fixed_cfg(5));
    CHECK(std::abs(seg.breaks[0] - 25) <= 1);
}

TEST_CASE("breaks are reported on the series' own day axis") {
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) y.push_back(i < 5 ? 0.0 : 7.0);
    DailySeries s = series_of(y, 101);  // days 101..110
    Segmentation seg = optimal_partition(s, 1, fixed_cfg(3));
    REQUIRE(seg.breaks.size() == 1);
    CHECK(seg.breaks[0] == 105);
}

TEST_CASE("bootstrap intervals cover an unambiguous break") {
    Rng rng(5);
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) y.push_back((i < 30 ? 0.0 : 20.0) + rng.normal(0.0, 1.0));
    BreakConfig cfg;
    cfg.max_breaks = 3;
    cfg.min_segment = 7;
    cfg.bootstrap_reps = 200;
    cfg.ci_level = 0.95;
    cfg.seed = 11;
    DailySeries s = series_of(y);
    Segmentation seg = select_breaks(s, cfg);
    REQUIRE(seg.m_selected == 1);
    bootstrap_ci(seg, s, cfg);
    REQUIRE(seg.intervals.size() == 1);
    CHECK(seg.intervals[0].low <= seg.breaks[0]);
    CHECK(seg.intervals[0].high >= seg.breaks[0]);
    // clean step: the interval should be tight
    CHECK(seg.intervals[0].high - seg.intervals[0].low <= 4);
    CHECK_FALSE(seg.unstable_ci);
    CHECK(seg.method == "bootstrap-percentile");
}

TEST_CASE("bootstrap is deterministic in the seed") {
    Rng rng(8);
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) y.push_back((i < 20 ? 1.0 : 9.0) + rng.normal(0.0, 2.0));
    BreakConfig cfg;
    cfg.max_breaks = 2;
    cfg.min_segment = 7;
    cfg.bootstrap_reps = 150;
    cfg.seed = 21;
    DailySeries s = series_of(y);
    Segmentation a = select_breaks(s, cfg);
    Segmentation b = a;
    bootstrap_ci(a, s, cfg);
    bootstrap_ci(b, s, cfg);
    REQUIRE(a.intervals.size() == b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        CHECK(a.intervals[i].low == b.intervals[i].low);
        CHECK(a.intervals[i].high == b.intervals[i].high);
    }
}

TEST_CASE("too few bootstrap replicates are refused") {
    std::vector<double> y(40, 1.0);
    for (int i = 20; i < 40; ++i) y[i] = 5.0;
    BreakConfig cfg;
    cfg.min_segment = 7;
    cfg.bootstrap_reps = 50;
    DailySeries s = series_of(y);
    Segmentation seg = select_breaks(s, cfg);
    CHECK_THROWS_AS(bootstrap_ci(seg, s, cfg), Error);
}
