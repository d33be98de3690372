#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

inline void validate_point(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
        p.lon < -180.0 || p.lon > 180.0)
        raise(Errc::invalid_argument, "coordinate (" + std::to_string(p.lat) + ", " +
                                          std::to_string(p.lon) + ") out of bounds");
}

// Distance model.  haversine is the real one; planar treats (lat, lon) as
// kilometre coordinates on a flat plane, which makes distances exactly
// translation-invariant and is what the synthetic property tests use.
enum class GeoMetric { haversine, planar_km };

inline constexpr double earth_radius_km = 6371.0088;

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double rad = std::numbers::pi / 180.0;
    double phi1 = a.lat * rad;
    double phi2 = b.lat * rad;
    double dphi = (b.lat - a.lat) * rad;
    double dlam = (b.lon - a.lon) * rad;
    double s1 = std::sin(dphi / 2.0);
    double s2 = std::sin(dlam / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * earth_radius_km * std::asin(std::sqrt(h));
}

inline double point_distance_km(const GeoPoint& a, const GeoPoint& b,
                                GeoMetric metric = GeoMetric::haversine) {
    if (metric == GeoMetric::planar_km) return std::hypot(b.lat - a.lat, b.lon - a.lon);
    return haversine_km(a, b);
}

// All contact locations recorded on one day.  Exact duplicate coordinates
// are collapsed at ingest (dedup_points) so repeated visits to one place do
// not weight the averages.
struct ContactDay {
    int day = 0;
    std::vector<GeoPoint> points;
};

inline std::size_t dedup_points(ContactDay& cd) {
    auto less = [](const GeoPoint& a, const GeoPoint& b) {
        if (a.lat != b.lat) return a.lat < b.lat;
        return a.lon < b.lon;
    };
    auto eq = [](const GeoPoint& a, const GeoPoint& b) { return a.lat == b.lat && a.lon == b.lon; };
    std::size_t before = cd.points.size();
    std::sort(cd.points.begin(), cd.points.end(), less);
    cd.points.erase(std::unique(cd.points.begin(), cd.points.end(), eq), cd.points.end());
    return before - cd.points.size();
}

// Grouped distance between two days' contact sets: the mean distance over
// all cross pairs.  Symmetric in its arguments.
inline double grouped_distance(const ContactDay& a, const ContactDay& b,
                               GeoMetric metric = GeoMetric::haversine) {
    if (a.points.empty() || b.points.empty())
        raise(Errc::empty_series, "grouped distance needs non-empty point sets");
    double sum = 0.0;
    for (const auto& p : a.points)
        for (const auto& q : b.points) sum += point_distance_km(p, q, metric);
    return sum / (static_cast<double>(a.points.size()) * static_cast<double>(b.points.size()));
}

// Directed Hausdorff distance from `from` to `to`: the worst-case distance
// from a point of `from` to the set `to`.  Not symmetric; the dispersion
// pipeline always measures from the newer day back to the older one.
inline double directed_hausdorff(const ContactDay& from, const ContactDay& to,
                                 GeoMetric metric = GeoMetric::haversine) {
    if (from.points.empty() || to.points.empty())
        raise(Errc::empty_series, "hausdorff distance needs non-empty point sets");
    double worst = 0.0;
    for (const auto& p : from.points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& q : to.points) nearest = std::min(nearest, point_distance_km(p, q, metric));
        worst = std::max(worst, nearest);
    }
    return worst;
}

// One day of the dispersion trajectory: distances between day t's contact
// set and day t+1's, indexed at t.  momentum = d_g - d_h; positive values
// mean day t+1's locations all sit within the typical spread of day t
// (containment), negative values mean at least one location escaped it.
struct DispersionPoint {
    int day = 0;
    double d_g = 0.0;
    double d_h = 0.0;
    double momentum = 0.0;
};

struct DispersionSeries {
    std::vector<DispersionPoint> points;  // only day pairs where both sides have data
    DailySeries momentum_raw;             // full axis, gaps where a pair is unusable
    DailySeries momentum_sma;
};

// Builds the dispersion trajectory from per-day contact sets.  For each pair
// of consecutive calendar days (t, t+1) with points on both days it computes
// d_g(t, t+1), the directed Hausdorff from day t+1 back to day t, and their
// difference; pairs with a missing or empty side become gaps.  The smoothed
// momentum uses the trailing window over present values.
inline DispersionSeries momentum_series(const std::vector<ContactDay>& days, int window,
                                        GeoMetric metric = GeoMetric::haversine) {
    std::vector<const ContactDay*> usable;
    for (const auto& cd : days)
        if (!cd.points.empty()) usable.push_back(&cd);
    if (usable.size() < 2)
        raise(Errc::insufficient_data, "need at least two days with contact locations");
    for (std::size_t i = 1; i < usable.size(); ++i)
        if (usable[i]->day <= usable[i - 1]->day)
            raise(Errc::invalid_argument, "contact days must be strictly increasing");

    DispersionSeries out;
    int first = usable.front()->day;
    int last = usable.back()->day;
    out.momentum_raw.start_day = first;
    out.momentum_raw.label = "momentum_km";
    out.momentum_raw.values.assign(static_cast<std::size_t>(last - first), std::nullopt);

    std::size_t idx = 0;
    for (int t = first; t < last; ++t) {
        while (idx + 1 < usable.size() && usable[idx]->day < t) ++idx;
        if (usable[idx]->day != t || usable[idx + 1]->day != t + 1) continue;
        DispersionPoint dp;
        dp.day = t;
        dp.d_g = grouped_distance(*usable[idx], *usable[idx + 1], metric);
        dp.d_h = directed_hausdorff(*usable[idx + 1], *usable[idx], metric);
        dp.momentum = dp.d_g - dp.d_h;
        out.points.push_back(dp);
        out.momentum_raw.values[static_cast<std::size_t>(t - first)] = dp.momentum;
    }
    if (out.points.empty())
        raise(Errc::insufficient_data, "no consecutive day pairs with contact locations");
    out.momentum_sma = simple_moving_average(out.momentum_raw, window);
    out.momentum_sma.label = "momentum_sma_km";
    return out;
}

// Days where the smoothed momentum settles on the opposite side of zero.
// The sign of the first present value establishes the initial regime; the
// regime then persists until a run of at least min_run consecutive days
// (present values, no gaps) holds the opposite sign, and the first day of
// that run is reported as the transition.  Shorter excursions are blips and
// leave the regime untouched; a gap interrupts a candidate run but does not
// end an established regime.  Zero counts as the non-positive side: positive
// momentum marks the geospatial peak regime, everything else
// expansion/contraction.
inline std::vector<int> sign_transitions(const DailySeries& momentum, int min_run = 7) {
    momentum.check();
    if (min_run < 1) raise(Errc::invalid_argument, "min_run must be positive");
    auto side = [](double v) { return v > 0.0 ? 1 : -1; };

    std::vector<int> out;
    int regime = 0;       // 0 until the first present value
    int cand_sign = 0;
    int cand_day = 0;     // first day of the candidate run
    int cand_len = 0;
    int prev_present = 0;
    for (std::size_t i = 0; i < momentum.size(); ++i) {
        int day = momentum.day_at(i);
        if (!momentum.values[i]) {
            cand_sign = 0;
            cand_len = 0;
            continue;
        }
        if (cand_sign != 0 && day != prev_present + 1) {
            cand_sign = 0;
            cand_len = 0;
        }
        prev_present = day;
        int sgn = side(*momentum.values[i]);
        if (regime == 0) {
            regime = sgn;
            continue;
        }
        if (sgn == regime) {
            cand_sign = 0;
            cand_len = 0;
            continue;
        }
        if (cand_sign == 0) {
            cand_sign = sgn;
            cand_day = day;
            cand_len = 1;
        } else {
            ++cand_len;
        }
        if (cand_len >= min_run) {
            out.push_back(cand_day);
            regime = sgn;
            cand_sign = 0;
            cand_len = 0;
        }
    }
    return out;
}

}  // namespace epiphase
