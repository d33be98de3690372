// Shows the dispersion pair (d_g, d_H) reacting to a cluster that first
// scatters across the city and then collapses back to one neighbourhood.
#include <cstdio>
#include <vector>

#include "epiphase/geo.hpp"
#include "epiphase/rng.hpp"

namespace {

epiphase::GeoPoint near(epiphase::Rng& rng, double lat, double lon, double km) {
    // ~1 deg latitude = 111.19 km; good enough for a toy scene
    double s = km / 111.1949;
    return {lat + rng.normal(0.0, s), lon + rng.normal(0.0, s)};
}

}  // namespace

int main() {
    epiphase::Rng rng(3);
    std::vector<epiphase::ContactDay> days;
    for (int day = 1; day <= 30; ++day) {
        epiphase::ContactDay cd;
        cd.day = day;
        bool scattered = day > 8 && day <= 20;
        for (int i = 0; i < 12; ++i) {
            if (scattered)
                cd.points.push_back(near(rng, 37.55 + rng.normal(0.0, 0.08),
                                         127.0 + rng.normal(0.0, 0.08), 1.0));
            else
                cd.points.push_back(near(rng, 37.55, 127.0, 0.8));
        }
        days.push_back(std::move(cd));
    }

    epiphase::DispersionSeries ds = epiphase::momentum_series(days, 5);
    std::printf("day   d_g km   d_H km   momentum\n");
    for (const auto& p : ds.points)
        std::printf("%3d   %6.2f   %6.2f   %+7.2f\n", p.day, p.d_g, p.d_h, p.momentum);

    std::vector<int> flips = epiphase::sign_transitions(ds.momentum_sma, 3);
    std::printf("smoothed momentum changes sign at:");
    for (int t : flips) std::printf(" %d", t);
    std::printf("\n");
    return 0;
}
