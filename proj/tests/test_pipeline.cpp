#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "epiphase/runner.hpp"
#include "epiphase/synth.hpp"
#include "helpers.hpp"

using namespace epiphase;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

PipelineConfig config_for(const std::string& bundle_dir, const std::string& out_dir) {
    PipelineConfig cfg;
    cfg.cases = bundle_dir + "/cases.csv";
    cfg.contacts = bundle_dir + "/contacts.csv";
    cfg.subway = bundle_dir + "/subway.csv";
    cfg.traffic = bundle_dir + "/traffic.csv";
    cfg.holidays = bundle_dir + "/holidays.csv";
    cfg.survey = bundle_dir + "/survey.csv";
    cfg.policy = bundle_dir + "/policy.csv";
    cfg.policy_indicators = bundle_dir + "/policy_indicators.csv";
    cfg.out = out_dir;
    cfg.bootstrap_reps = 200;  // enough for stable intervals, fast enough for a test
    cfg.seed = 17;
    return cfg;
}

int nearest_distance(int day, const std::vector<int>& truth) {
    int best = 1 << 20;
    for (int t : truth) best = std::min(best, std::abs(day - t));
    return best;
}

}  // namespace

TEST_CASE("full pipeline on the synthetic bundle") {
    TempDir bundle("pl_bundle");
    TempDir out("pl_out");
    SynthSpec spec;
    SynthTruth truth = write_bundle(bundle.path.string(), spec);

    PipelineConfig cfg = config_for(bundle.path.string(), out.path.string());

    ValidationReport rep = validate_inputs(cfg);
    CHECK(rep.ok);

    PipelineResult res = run_pipeline(cfg);

    // every planted level shift is found within a few days, and every
    // detected break sits on one of the planted ramps (the smeared steps
    // can be worth more than one cut each, so the count may exceed four)
    REQUIRE(res.cases.seg.m_selected >= static_cast<int>(truth.case_breaks.size()));
    for (int planted : truth.case_breaks) {
        INFO("planted shift at day " << planted);
        CHECK(nearest_distance(planted, res.cases.seg.breaks) <= 4);
    }
    for (int got : res.cases.seg.breaks) {
        INFO("detected break at day " << got);
        CHECK(nearest_distance(got, truth.case_breaks) <= 7);
    }
    // intervals exist and contain their point estimates
    REQUIRE(res.cases.seg.intervals.size() == res.cases.seg.breaks.size());
    for (std::size_t i = 0; i < res.cases.seg.breaks.size(); ++i) {
        CHECK(res.cases.seg.intervals[i].low <= res.cases.seg.breaks[i]);
        CHECK(res.cases.seg.intervals[i].high >= res.cases.seg.breaks[i]);
    }

    // planted dispersion flips are recovered within the smoothing lag
    REQUIRE(res.geo.transitions.size() == truth.geo_flips.size());
    for (std::size_t i = 0; i < res.geo.transitions.size(); ++i) {
        INFO("flip " << i << ": got " << res.geo.transitions[i] << " planted "
                     << truth.geo_flips[i]);
        CHECK(nearest_distance(res.geo.transitions[i], truth.geo_flips) <= 4);
    }

    // the timeline covers the window and starts with the trigger
    res.timeline.check();
    CHECK(res.timeline.horizon == spec.horizon);
    CHECK(res.timeline.phases.front().label.kind == PhaseKind::trigger);
    CHECK(res.timeline.phases.size() >= 4);

    // per-phase fits cover both modes for every phase
    REQUIRE(res.fits.rows.size() == 2 * res.timeline.phases.size());
    int usable = 0;
    for (const auto& row : res.fits.rows) {
        if (row.ok) {
            CHECK(row.fit.n >= 3);
            ++usable;
        }
    }
    CHECK(usable >= 4);

    // seasonality scan produced an entry per (mode, slice)
    CHECK(res.seasonality.size() == 12);

    // declared outputs all exist on disk
    std::set<std::string> expect = {
        "cases_sma.csv", "breaks.json",    "dispersion.csv",  "phases.json",
        "phases.csv",    "phase_fits.csv", "phase_fits.json", "seasonality_breaks.json",
        "indices.csv",   "fig1.svg",       "fig2.svg",        "fig3.svg",
        "fig4.svg",      "figS1.svg",      "manifest.json"};
    std::set<std::string> got(res.outputs.begin(), res.outputs.end());
    for (const auto& name : expect) {
        INFO(name);
        CHECK(got.count(name) == 1);
        CHECK(fs::exists(out.path / name));
    }
    CHECK(got.size() == expect.size());

    // the manifest carries the run configuration
    auto m = nlohmann::json::parse(testutil::slurp(out.file("manifest.json")));
    CHECK(m.contains("generated_at"));
    CHECK(m.contains("config_hash"));
    CHECK(m["config"]["seed"] == "17");
    CHECK(m["tool"] == "epiphase");
    CHECK(m.contains("methods"));
    CHECK(m["outputs"].size() == expect.size());
}

TEST_CASE("identical config and seed reproduce byte-identical outputs") {
    TempDir bundle("pl_det_bundle");
    TempDir out("pl_det_out");
    SynthSpec spec;
    write_bundle(bundle.path.string(), spec);

    // both runs use the very same config (the out path is part of the
    // manifest's config echo), with the first run's files moved aside
    PipelineConfig cfg = config_for(bundle.path.string(), (out.path / "run").string());
    run_pipeline(cfg);
    fs::rename(out.path / "run", out.path / "first");
    run_pipeline(cfg);

    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(out.path / "first"))
        names.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(out.path / "run"))
        CHECK(names.count(e.path().filename().string()) == 1);

    for (const std::string& name : names) {
        std::string a = testutil::slurp((out.path / "first" / name).string());
        std::string b = testutil::slurp((out.path / "run" / name).string());
        if (name == "manifest.json") {
            auto ja = nlohmann::json::parse(a);
            auto jb = nlohmann::json::parse(b);
            ja.erase("generated_at");
            jb.erase("generated_at");
            CHECK(ja == jb);
        } else {
            INFO(name);
            CHECK(a == b);
        }
    }
}

TEST_CASE("a changed seed moves only the resampled artifacts") {
    TempDir bundle("pl_seed_bundle");
    TempDir out1("pl_seed_out1");
    TempDir out2("pl_seed_out2");
    SynthSpec spec;
    write_bundle(bundle.path.string(), spec);

    PipelineConfig cfg1 = config_for(bundle.path.string(), out1.path.string());
    PipelineConfig cfg2 = config_for(bundle.path.string(), out2.path.string());
    cfg2.seed = 18;
    PipelineResult r1 = run_pipeline(cfg1);
    PipelineResult r2 = run_pipeline(cfg2);

    // point estimates are seed-free
    CHECK(r1.cases.seg.breaks == r2.cases.seg.breaks);
    CHECK(r1.geo.transitions == r2.geo.transitions);
    // the smoothed series and derived tables are identical
    CHECK(testutil::slurp(out1.file("cases_sma.csv")) ==
          testutil::slurp(out2.file("cases_sma.csv")));
    CHECK(testutil::slurp(out1.file("dispersion.csv")) ==
          testutil::slurp(out2.file("dispersion.csv")));
    CHECK(testutil::slurp(out1.file("indices.csv")) == testutil::slurp(out2.file("indices.csv")));
}

TEST_CASE("missing required inputs fail validation with an io error") {
    TempDir bundle("pl_missing");
    SynthSpec spec;
    write_bundle(bundle.path.string(), spec);
    PipelineConfig cfg = config_for(bundle.path.string(), bundle.path.string() + "/out");
    cfg.cases = bundle.path.string() + "/nonexistent.csv";
    ValidationReport rep = validate_inputs(cfg);
    CHECK_FALSE(rep.ok);
    bool found = false;
    for (const auto& fc : rep.files)
        if (fc.name == "cases") {
            found = true;
            CHECK_FALSE(fc.ok);
        }
    CHECK(found);

    cfg.cases.clear();
    CHECK_THROWS_AS(validate_inputs(cfg), Error);
}

TEST_CASE("stage failures surface the stage name and clean up the bundle") {
    TempDir bundle("pl_stagefail");
    TempDir out("pl_stagefail_out");
    SynthSpec spec;
    write_bundle(bundle.path.string(), spec);
    PipelineConfig cfg = config_for(bundle.path.string(), out.path.string());
    cfg.contacts = bundle.path.string() + "/nonexistent.csv";
    try {
        run_pipeline(cfg);
        FAIL("expected the dispersion stage to fail");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage") != std::string::npos);
    }
    // nothing half-written is left behind
    CHECK_FALSE(fs::exists(out.path / "cases_sma.csv"));
}

TEST_CASE("the synthetic generator itself is deterministic") {
    TempDir a("synth_a");
    TempDir b("synth_b");
    SynthSpec spec;
    write_bundle(a.path.string(), spec);
    write_bundle(b.path.string(), spec);
    for (const auto& e : fs::directory_iterator(a.path)) {
        std::string name = e.path().filename().string();
        INFO(name);
        CHECK(testutil::slurp((a.path / name).string()) ==
              testutil::slurp((b.path / name).string()));
    }
}
