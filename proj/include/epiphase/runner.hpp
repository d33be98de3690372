#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <string>
#include <vector>

#include "epiphase/figures.hpp"
#include "epiphase/pipeline.hpp"

namespace epiphase {

// Runs every stage in order and writes the full artifact bundle.  A failure
// in any stage removes whatever files this run had already written, so the
// output directory never holds a half-finished bundle, and the error names
// the stage it came from.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    StudyCalendar cal = cfg.calendar();
    detail::Bundle bundle(cfg.out);
    PipelineResult res;

    std::string stage = "setup";
    try {
        stage = "cases";
        res.cases = run_case_stage(cfg, cal);
        write_cases_sma_csv(bundle.file("cases_sma.csv"), res.cases, cal);
        detail::write_json(bundle.file("breaks.json"), detail::segmentation_json(res.cases.seg));
        if (res.cases.seg.ssr_floor_hit)
            res.warnings.push_back("count-series BIC evaluated at the SSR floor");
        if (res.cases.seg.unstable_ci)
            res.warnings.push_back(
                "count-series bootstrap discarded more than 10% of replicates");

        stage = "dispersion";
        res.geo = run_geo_stage(cfg, cal);
        write_dispersion_csv(bundle.file("dispersion.csv"), res.geo);

        stage = "phases";
        res.timeline = run_phase_stage(res.cases, res.geo, cfg);
        write_phases_json(bundle.file("phases.json"), res.timeline, cal);
        write_phases_csv(bundle.file("phases.csv"), res.timeline, cal);
        for (const auto& d : res.timeline.dropped)
            res.warnings.push_back("transition day " + std::to_string(d.day) +
                                   " dropped: " + d.reason);

        stage = "mobility";
        MobilityData subway = load_mobility("subway", cfg.subway, cal, cfg.missing_ceiling);
        MobilityData traffic = load_mobility("traffic", cfg.traffic, cal, cfg.missing_ceiling);
        for (const MobilityData* md : {&subway, &traffic})
            for (const auto& id : md->rejected)
                res.warnings.push_back(md->mode + " sensor " + id +
                                       " dropped: missing rate above ceiling");
        SliceSpec all_day{"all_week_all_hours", DayFilter::all_week, {}};
        std::map<std::string, DailySeries> reduction_by_mode;
        for (const MobilityData* md : {&subway, &traffic}) {
            DailySeries r = slice_reduction_daily(*md, cal, all_day, cfg.horizon, cfg.sma_window,
                                                  cfg.smooth_before_reduction);
            if (!cfg.smooth_before_reduction) r = simple_moving_average(r, cfg.sma_window);
            r.label = md->mode + "_reduction";
            reduction_by_mode[md->mode] = std::move(r);
        }

        stage = "fits";
        res.fits =
            phase_fit_table(reduction_by_mode, fit_regressor(res.cases, cfg), res.timeline);
        write_phase_fits_csv(bundle.file("phase_fits.csv"), res.fits);
        write_phase_fits_json(bundle.file("phase_fits.json"), res.fits);

        stage = "seasonality";
        for (const MobilityData* md : {&subway, &traffic}) {
            auto entries = run_seasonality_stage(*md, cal, cfg);
            res.seasonality.insert(res.seasonality.end(), entries.begin(), entries.end());
        }
        write_seasonality_json(bundle.file("seasonality_breaks.json"), res.seasonality);

        stage = "index";
        const std::vector<IndicatorInfo> table =
            cfg.policy_indicators.empty() ? default_indicator_table()
                                          : load_indicator_table(cfg.policy_indicators);
        std::vector<PolicyRecord> records = load_policy_records(cfg.policy, table);
        res.indices = index_series(records, cfg.horizon, table);
        write_indices_csv(bundle.file("indices.csv"), res.indices);

        stage = "figures";
        std::vector<SurveyPoint> survey;
        if (!cfg.survey.empty()) {
            survey = load_survey(cfg.survey, cal);
        } else {
            res.warnings.push_back("survey file not configured; fig4 drawn without overlays");
        }
        write_fig1(bundle.file("fig1.svg"), res.cases, res.geo, res.timeline);
        write_fig2(bundle.file("fig2.svg"), res.fits, reduction_by_mode,
                   fit_regressor(res.cases, cfg), res.timeline);
        write_fig3(bundle.file("fig3.svg"), subway, traffic, cal, cfg, res.seasonality);
        write_fig4(bundle.file("fig4.svg"), reduction_by_mode.at("subway"), survey, cal);
        write_figs1(bundle.file("figS1.svg"), res.indices);

        stage = "manifest";
        ordered_json man;
        man["tool"] = tool_name;
        man["version"] = tool_version;
        {
            auto now = std::chrono::system_clock::now();
            std::time_t t = std::chrono::system_clock::to_time_t(now);
            std::tm tm_utc{};
            gmtime_r(&t, &tm_utc);
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
            man["generated_at"] = buf;  // the one field determinism checks ignore
        }
        ordered_json conf;
        for (const auto& [k, v] : cfg.echo()) conf[k] = v;
        man["config"] = conf;
        man["config_hash"] = cfg.config_hash();
        ordered_json methods;
        methods["changepoint"] = "exact dynamic programming over segment means, BIC-selected";
        methods["confidence_intervals"] =
            "within-segment residual bootstrap, nearest-rank percentile";
        methods["dispersion"] = cfg.planar ? "planar km approximation" : "haversine";
        methods["policy_formula"] =
            "additive flag formula: flagged 100*(score+flag)/(max+1), unflagged 100*score/max";
        methods["seasonality_hours"] =
            "break hour read as within-day position in the hourly series (interpretation)";
        methods["smoothing"] = cfg.smooth_before_reduction
                                   ? "sums smoothed before the reduction ratio"
                                   : "reduction ratio smoothed after division";
        man["methods"] = methods;
        ordered_json dropped = ordered_json::array();
        for (const auto& d : res.timeline.dropped)
            dropped.push_back({{"day", d.day}, {"reason", d.reason}});
        man["dropped_transitions"] = dropped;
        man["warnings"] = res.warnings;
        std::vector<std::string> names = bundle.names();
        names.push_back("manifest.json");
        man["outputs"] = names;
        detail::write_json(bundle.file("manifest.json"), man);

        res.outputs = bundle.names();
    } catch (const Error& e) {
        bundle.discard();
        raise(e.code(), "stage " + stage + ": " + e.what());
    } catch (const std::exception& e) {
        bundle.discard();
        raise(Errc::invalid_argument, "stage " + stage + ": " + e.what());
    }
    return res;
}

}  // namespace epiphase
