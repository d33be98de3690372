#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"

namespace epiphase {

// One of the thirteen policy indicators: its ordinal ceiling and whether it
// carries the general-vs-targeted scope flag that enters the sub-index.
struct IndicatorInfo {
    std::string code;
    int max_score = 1;
    bool flagged = false;
};

// Containment/closure (C), economic (E) and health-system (H) indicators
// with their standard maxima and flag assignment.  A CSV copy lives in
// data/policy_indicators.csv; pass it via --policy_indicators to override
// this table without a rebuild.
inline const std::vector<IndicatorInfo>& default_indicator_table() {
    static const std::vector<IndicatorInfo> table = {
        {"C1", 3, true},  // school closing
        {"C2", 3, true},  // workplace closing
        {"C3", 2, true},  // cancel public events
        {"C4", 4, true},  // restrictions on gatherings
        {"C5", 2, true},  // close public transport
        {"C6", 3, true},  // stay-at-home requirement
        {"C7", 2, true},  // internal movement restrictions
        {"C8", 4, false}, // international travel controls
        {"E1", 2, true},  // income support
        {"E2", 2, false}, // debt / contract relief
        {"H1", 2, true},  // public information campaigns
        {"H2", 3, false}, // testing policy
        {"H3", 2, false}, // contact tracing
    };
    return table;
}

inline const std::vector<std::string>& government_indicators() {
    static const std::vector<std::string> v = {"C1", "C2", "C3", "C4", "C5", "C6", "C7",
                                               "C8", "E1", "E2", "H1", "H2", "H3"};
    return v;
}

// The three indicators that directly constrain movement: public transport
// closure, stay-at-home requirement, internal movement restrictions.
inline const std::vector<std::string>& mobility_indicators() {
    static const std::vector<std::string> v = {"C5", "C6", "C7"};
    return v;
}

inline const IndicatorInfo& indicator_info(const std::string& code,
                                           const std::vector<IndicatorInfo>& table) {
    for (const auto& info : table)
        if (info.code == code) return info;
    raise(Errc::invalid_argument, "unknown policy indicator '" + code + "'");
}

// A policy in force over a closed day range.  flag is 1 for nationwide /
// general measures, 0 for targeted ones, and absent for indicators that do
// not carry a flag (treated as 0 in the arithmetic).
struct PolicyRecord {
    std::string indicator;
    int start_day = 0;
    int end_day = 0;
    int score = 0;
    std::optional<int> flag;
};

inline void validate_records(const std::vector<PolicyRecord>& records,
                             const std::vector<IndicatorInfo>& table = default_indicator_table()) {
    std::map<std::pair<std::string, int>, int> starts;
    for (const auto& r : records) {
        const IndicatorInfo& info = indicator_info(r.indicator, table);
        if (r.score < 0 || r.score > info.max_score)
            raise(Errc::invalid_record, r.indicator + " score " + std::to_string(r.score) +
                                            " outside [0, " + std::to_string(info.max_score) + "]");
        if (r.flag && (*r.flag != 0 && *r.flag != 1))
            raise(Errc::invalid_record, r.indicator + " flag must be 0 or 1");
        if (r.start_day > r.end_day)
            raise(Errc::invalid_record, r.indicator + " record ends before it starts");
        if (++starts[{r.indicator, r.start_day}] > 1)
            raise(Errc::invalid_record, "two " + r.indicator + " records start on day " +
                                            std::to_string(r.start_day) +
                                            "; overlaps must differ in start day");
    }
}

// Sub-index of one indicator on one day.  Score 0 is always 0; otherwise
// flag-carrying indicators use 100*(score + flag)/(max + 1) and the rest
// 100*score/max.
inline double sub_index(int score, int flag, int max_score, bool flagged) {
    if (score < 0 || score > max_score) raise(Errc::invalid_record, "score outside [0, max]");
    if (flag != 0 && flag != 1) raise(Errc::invalid_record, "flag must be 0 or 1");
    if (max_score < 1) raise(Errc::invalid_record, "max score must be positive");
    if (score == 0) return 0.0;
    if (flagged) return 100.0 * (score + flag) / (max_score + 1.0);
    return 100.0 * score / max_score;
}

// The record in force for (indicator, day): among records covering the day,
// the one with the latest start wins.  No record means no measure.
inline const PolicyRecord* active_record(const std::vector<PolicyRecord>& records,
                                         const std::string& indicator, int day) {
    const PolicyRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.indicator != indicator || day < r.start_day || day > r.end_day) continue;
        if (!best || r.start_day > best->start_day) best = &r;
    }
    return best;
}

// Mean sub-index over an indicator set on one day; indicators with nothing
// in force contribute 0.
inline double composite_index(const std::vector<PolicyRecord>& records,
                              const std::vector<std::string>& indicator_set, int day,
                              const std::vector<IndicatorInfo>& table = default_indicator_table()) {
    if (indicator_set.empty()) raise(Errc::invalid_argument, "empty indicator set");
    double sum = 0.0;
    for (const auto& code : indicator_set) {
        const IndicatorInfo& info = indicator_info(code, table);
        const PolicyRecord* r = active_record(records, code, day);
        if (r) sum += sub_index(r->score, r->flag.value_or(0), info.max_score, info.flagged);
    }
    return sum / static_cast<double>(indicator_set.size());
}

struct IndexSeries {
    int start_day = 1;
    std::vector<double> government;
    std::vector<double> mobility;
};

inline IndexSeries index_series(const std::vector<PolicyRecord>& records, int horizon,
                                const std::vector<IndicatorInfo>& table = default_indicator_table()) {
    if (horizon < 1) raise(Errc::invalid_argument, "horizon must be positive");
    validate_records(records, table);
    IndexSeries out;
    out.government.reserve(static_cast<std::size_t>(horizon));
    out.mobility.reserve(static_cast<std::size_t>(horizon));
    for (int day = 1; day <= horizon; ++day) {
        out.government.push_back(composite_index(records, government_indicators(), day, table));
        out.mobility.push_back(composite_index(records, mobility_indicators(), day, table));
    }
    return out;
}

// Reference transcription of the study window's policy timeline (scores per
// the standard codebook, flag 1 = nationwide).  Days are study day indices;
// open-ended measures run to day 189.  Later-starting records supersede
// earlier ones while both are in force.  Pipeline runs read the same rows
// from data/policy_records.csv; this copy backs tests and the synthetic
// data generator.
inline std::vector<PolicyRecord> default_policy_records() {
    const int H = 189;
    auto F = [](int f) { return std::optional<int>(f); };
    return {
        {"C1", 1, 34, 0, {}},   {"C1", 35, 121, 3, F(1)}, {"C1", 122, H, 2, F(1)},
        {"C1", 131, H, 2, F(0)},
        {"C2", 8, H, 1, F(1)},  {"C2", 63, 91, 2, F(1)},  {"C2", 92, 107, 2, F(1)},
        {"C2", 108, H, 2, F(1)},
        {"C3", 24, H, 0, {}},   {"C3", 34, H, 1, F(1)},   {"C3", 63, 91, 2, F(1)},
        {"C3", 92, 107, 1, F(1)}, {"C3", 108, 130, 0, {}}, {"C3", 131, H, 1, F(0)},
        {"C4", 24, H, 0, {}},   {"C4", 34, H, 1, F(1)},   {"C4", 63, 92, 4, F(1)},
        {"C4", 93, 107, 3, F(1)}, {"C4", 108, H, 0, F(1)}, {"C4", 111, H, 3, F(0)},
        {"C4", 131, H, 1, F(0)},
        // C5 (public transport): no measure in the window.
        {"C6", 35, H, 1, F(0)}, {"C6", 41, 42, 1, F(1)},  {"C6", 48, 49, 1, F(1)},
        {"C6", 55, 56, 1, F(1)}, {"C6", 61, 62, 1, F(1)}, {"C6", 63, 91, 1, F(1)},
        {"C6", 92, 107, 1, F(1)}, {"C6", 108, H, 1, F(0)}, {"C6", 131, H, 1, F(0)},
        {"C7", 35, H, 1, F(0)},
        {"C8", 1, H, 1, {}},    {"C8", 9, H, 1, {}},      {"C8", 16, H, 3, {}},
        {"C8", 74, H, 2, {}},
        {"E1", 73, H, 1, F(0)},
        {"E2", 19, H, 1, {}},
        {"H1", 1, 4, 1, F(0)},  {"H1", 5, H, 2, F(1)},    {"H1", 11, H, 2, F(1)},
        {"H2", 1, 8, 1, {}},    {"H2", 19, H, 3, {}},     {"H2", 38, H, 3, {}},
        {"H3", 1, H, 2, {}},    {"H3", 67, H, 2, {}},
    };
}

}  // namespace epiphase
