// Command-line front end: validate inputs, run the full batch pipeline, or
// run a single stage.  Every subcommand reads the same flat key=value config
// file; command-line flags override config values.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epiphase/runner.hpp"
#include "epiphase/synth.hpp"

namespace {

int exit_code_for(epiphase::Errc code) {
    switch (code) {
        case epiphase::Errc::io_error:
            return 2;
        case epiphase::Errc::parse_error:
        case epiphase::Errc::invalid_record:
            return 3;
        default:
            return 4;
    }
}

// Registers the shared options on the root app, bound straight into cfg.
// Subcommands run with fallthrough, so the flags work before or after the
// subcommand name.
void add_common_options(CLI::App* cmd, epiphase::PipelineConfig& cfg) {
    cmd->set_config("--config", "", "flat key=value config file; flags win");
    cmd->option_defaults()->always_capture_default();

    cmd->add_option("--cases", cfg.cases, "daily case counts CSV (date,count)");
    cmd->add_option("--contacts", cfg.contacts, "contact locations CSV (date,case_id,lat,lon)");
    cmd->add_option("--subway", cfg.subway, "hourly ridership CSV (date,hour,station_id,riders)");
    cmd->add_option("--traffic", cfg.traffic, "hourly volumes CSV (date,hour,sensor_id,volume)");
    cmd->add_option("--holidays", cfg.holidays,
                    "holiday baseline map CSV (date_2020,date_2019); built-in table when unset");
    cmd->add_option("--survey", cfg.survey, "survey CSV (date,metric,value)");
    cmd->add_option("--policy", cfg.policy,
                    "policy timeline CSV (indicator,start_day,end_day,score,flag)");
    cmd->add_option("--policy_indicators", cfg.policy_indicators,
                    "indicator table CSV (indicator,max_score,flagged); built-in when unset");

    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--seed", cfg.seed, "random seed for resampling");
    cmd->add_option("--origin", cfg.origin, "date of study day 1 (YYYY-MM-DD)");
    cmd->add_option("--horizon", cfg.horizon, "number of study days");
    cmd->add_option("--sma_window", cfg.sma_window, "moving-average window in days");
    cmd->add_option("--max_breaks", cfg.max_breaks, "largest break count considered");
    cmd->add_option("--min_segment", cfg.min_segment, "shortest allowed segment in days");
    cmd->add_option("--bootstrap_reps", cfg.bootstrap_reps,
                    "bootstrap replicates for break intervals (0 skips, else >= 100)");
    cmd->add_option("--ci_level", cfg.ci_level, "confidence level for break intervals");
    cmd->add_option("--min_run", cfg.min_run,
                    "consecutive opposite-sign days required for a momentum regime change");
    cmd->add_flag("--planar,!--no-planar", cfg.planar,
                  "use the planar km approximation instead of haversine");
    cmd->add_option("--merge_window", cfg.merge_window,
                    "days within which a dispersion transition merges into a count break");
    cmd->add_option("--lookahead", cfg.lookahead,
                    "days of momentum examined before accepting a de-escalation");
    cmd->add_option("--slope_t_threshold", cfg.slope_t_threshold,
                    "|t| above which a segment slope counts as rising or falling");
    cmd->add_flag("--raw_counts_regressor,!--no-raw_counts_regressor", cfg.raw_counts_regressor,
                  "regress on raw daily counts instead of their moving average");
    cmd->add_option("--case_lag", cfg.case_lag,
                    "pair day d of the reduction with day d-lag of the counts");
    cmd->add_option("--missing_ceiling", cfg.missing_ceiling,
                    "max tolerated share of missing cells per sensor");
    cmd->add_flag("--smooth_before_reduction,!--no-smooth_before_reduction",
                  cfg.smooth_before_reduction,
                  "smooth the ridership sums before taking the reduction ratio");
    cmd->add_option("--commute_preset", cfg.commute_preset,
                    "commute-hours slice: 'caption' (7-9 & 18-20) or 'table' (8-9 & 18-20)");
    cmd->add_option("--seasonality_max_breaks", cfg.seasonality_max_breaks,
                    "largest break count in the per-slice scan");
    cmd->add_option("--seasonality_bootstrap_reps", cfg.seasonality_bootstrap_reps,
                    "bootstrap replicates for per-slice intervals (0 skips)");
}

void print_validation(const epiphase::ValidationReport& rep) { std::cout << rep.text(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"epidemic phase analysis from case counts, contact locations and mobility"};
    app.require_subcommand(1);

    epiphase::PipelineConfig cfg;
    epiphase::SynthSpec synth_spec;
    std::string synth_dir = "synth_data";
    add_common_options(&app, cfg);

    CLI::App* validate = app.add_subcommand("validate", "check the configured inputs and report");
    CLI::App* run = app.add_subcommand("run", "run every stage and write the full bundle");
    CLI::App* cpd = app.add_subcommand("cpd", "count smoothing and level-shift detection only");
    CLI::App* geo = app.add_subcommand("geo", "geospatial dispersion series only");
    CLI::App* phases = app.add_subcommand("phases", "fused phase timeline (needs cases+contacts)");
    CLI::App* fit = app.add_subcommand("fit", "per-phase reduction fits (needs all mobility)");
    CLI::App* index = app.add_subcommand("index", "policy composite indices only");
    CLI::App* synth = app.add_subcommand("synth", "write the deterministic synthetic bundle");

    for (CLI::App* cmd : {validate, run, cpd, geo, phases, fit, index, synth})
        cmd->fallthrough();
    synth->add_option("--dir", synth_dir, "directory for the generated input files");

    CLI11_PARSE(app, argc, argv);

    try {
        epiphase::StudyCalendar cal = cfg.calendar();

        if (validate->parsed()) {
            epiphase::ValidationReport rep = epiphase::validate_inputs(cfg);
            print_validation(rep);
            return rep.ok ? 0 : 1;
        }
        if (run->parsed()) {
            epiphase::PipelineResult res = epiphase::run_pipeline(cfg);
            std::cout << "wrote " << res.outputs.size() << " files to " << cfg.out << "\n";
            for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
            return 0;
        }
        if (cpd->parsed()) {
            epiphase::detail::Bundle bundle(cfg.out);
            try {
                epiphase::CaseStage st = epiphase::run_case_stage(cfg, cal);
                epiphase::write_cases_sma_csv(bundle.file("cases_sma.csv"), st, cal);
                epiphase::detail::write_json(bundle.file("breaks.json"),
                                             epiphase::detail::segmentation_json(st.seg));
                std::cout << "breaks at:";
                for (int b : st.seg.breaks) std::cout << " " << b;
                std::cout << "\n";
            } catch (...) {
                bundle.discard();
                throw;
            }
            return 0;
        }
        if (geo->parsed()) {
            epiphase::detail::Bundle bundle(cfg.out);
            try {
                epiphase::GeoStage st = epiphase::run_geo_stage(cfg, cal);
                epiphase::write_dispersion_csv(bundle.file("dispersion.csv"), st);
                std::cout << "momentum sign changes at:";
                for (int t : st.transitions) std::cout << " " << t;
                std::cout << "\n";
            } catch (...) {
                bundle.discard();
                throw;
            }
            return 0;
        }
        if (phases->parsed()) {
            epiphase::detail::Bundle bundle(cfg.out);
            try {
                epiphase::CaseStage cs = epiphase::run_case_stage(cfg, cal);
                epiphase::GeoStage gs = epiphase::run_geo_stage(cfg, cal);
                epiphase::PhaseTimeline tl = epiphase::run_phase_stage(cs, gs, cfg);
                epiphase::write_phases_json(bundle.file("phases.json"), tl, cal);
                epiphase::write_phases_csv(bundle.file("phases.csv"), tl, cal);
                for (const epiphase::Phase& p : tl.phases)
                    std::cout << epiphase::phase_name(p.label) << " " << p.start_day << ".."
                              << p.end_day << "\n";
            } catch (...) {
                bundle.discard();
                throw;
            }
            return 0;
        }
        if (fit->parsed()) {
            epiphase::detail::Bundle bundle(cfg.out);
            try {
                epiphase::CaseStage cs = epiphase::run_case_stage(cfg, cal);
                epiphase::GeoStage gs = epiphase::run_geo_stage(cfg, cal);
                epiphase::PhaseTimeline tl = epiphase::run_phase_stage(cs, gs, cfg);
                std::map<std::string, epiphase::DailySeries> reductions;
                epiphase::SliceSpec all_day{"all_week_all_hours", epiphase::DayFilter::all_week,
                                            {}};
                for (const auto& [mode, path] :
                     {std::pair{std::string("subway"), cfg.subway},
                      std::pair{std::string("traffic"), cfg.traffic}}) {
                    epiphase::MobilityData md =
                        epiphase::load_mobility(mode, path, cal, cfg.missing_ceiling);
                    epiphase::DailySeries r = epiphase::slice_reduction_daily(
                        md, cal, all_day, cfg.horizon, cfg.sma_window,
                        cfg.smooth_before_reduction);
                    if (!cfg.smooth_before_reduction)
                        r = epiphase::simple_moving_average(r, cfg.sma_window);
                    reductions[mode] = std::move(r);
                }
                epiphase::PhaseFitTable table = epiphase::phase_fit_table(
                    reductions, epiphase::fit_regressor(cs, cfg), tl);
                epiphase::write_phase_fits_csv(bundle.file("phase_fits.csv"), table);
                epiphase::write_phase_fits_json(bundle.file("phase_fits.json"), table);
                std::cout << table.rows.size() << " fit rows written\n";
            } catch (...) {
                bundle.discard();
                throw;
            }
            return 0;
        }
        if (index->parsed()) {
            epiphase::detail::Bundle bundle(cfg.out);
            try {
                const auto table = cfg.policy_indicators.empty()
                                       ? epiphase::default_indicator_table()
                                       : epiphase::load_indicator_table(cfg.policy_indicators);
                auto records = epiphase::load_policy_records(cfg.policy, table);
                epiphase::IndexSeries idx =
                    epiphase::index_series(records, cfg.horizon, table);
                epiphase::write_indices_csv(bundle.file("indices.csv"), idx);
                std::cout << "indices for " << idx.government.size() << " days written\n";
            } catch (...) {
                bundle.discard();
                throw;
            }
            return 0;
        }
        if (synth->parsed()) {
            if (app.count("--seed")) synth_spec.seed = cfg.seed;
            if (app.count("--horizon")) synth_spec.horizon = cfg.horizon;
            epiphase::SynthTruth truth = epiphase::write_bundle(synth_dir, synth_spec);
            std::cout << "bundle written to " << synth_dir << "\nplanted count breaks:";
            for (int b : truth.case_breaks) std::cout << " " << b;
            std::cout << "\nplanted momentum flips:";
            for (int f : truth.geo_flips) std::cout << " " << f;
            std::cout << "\n";
            return 0;
        }
    } catch (const epiphase::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
