#pragma once

#include <map>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"
#include "epiphase/phases.hpp"
#include "epiphase/regression.hpp"
#include "epiphase/series.hpp"

namespace epiphase {

// Significance stars for a two-sided p-value, three conventional levels.
inline std::string significance_stars(double p, bool exact_fit = false) {
    if (exact_fit) return "***";
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

struct PhaseFitRow {
    PhaseLabel label;
    int start_day = 0;
    int end_day = 0;
    std::string mode;  // which mobility series the reduction came from
    bool ok = false;
    std::string note;  // why the fit is absent when !ok
    OlsFit fit;
};

struct PhaseFitTable {
    std::vector<PhaseFitRow> rows;
};

// One least-squares fit per (phase, mode): the mobility reduction within the
// phase regressed on the smoothed counts of the same days.  Days where
// either side is absent drop out; a phase left with fewer than three usable
// days, or with constant counts, produces a marked row instead of aborting
// the table.  Rows are ordered phase-major in timeline order, with modes in
// map (alphabetical) order inside each phase.
inline PhaseFitTable phase_fit_table(const std::map<std::string, DailySeries>& reduction_by_mode,
                                     const DailySeries& cases_sma, const PhaseTimeline& timeline) {
    timeline.check();
    cases_sma.check();
    if (reduction_by_mode.empty()) raise(Errc::empty_series, "no reduction series supplied");
    PhaseFitTable table;
    for (const Phase& ph : timeline.phases) {
        for (const auto& [mode, reduction] : reduction_by_mode) {
            PhaseFitRow row;
            row.label = ph.label;
            row.start_day = ph.start_day;
            row.end_day = ph.end_day;
            row.mode = mode;
            std::vector<double> xs, ys;
            for (int d = ph.start_day; d <= ph.end_day; ++d) {
                auto x = cases_sma.at_day(d);
                auto y = reduction.at_day(d);
                if (x && y) {
                    xs.push_back(*x);
                    ys.push_back(*y);
                }
            }
            if (xs.size() < 3) {
                row.note = "fewer than 3 usable days";
                table.rows.push_back(row);
                continue;
            }
            try {
                row.fit = ols_fit(xs, ys);
                row.ok = true;
            } catch (const Error& e) {
                row.note = e.what();
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

}  // namespace epiphase
