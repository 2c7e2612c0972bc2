#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ionsbm/runner.hpp"
#include "ionsbm/units.hpp"
#include "test_util.hpp"

using namespace ionsbm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

scenario::Scenario tiny_scenario() {
    return scenario::parse_scenario(json::parse(R"({
        "name": "tiny",
        "chain": {"ion_count": 3, "transverse_freq_khz": 2397.0, "axial_freq_khz": 400.0},
        "coupling": {"target_ion": 0, "g_com_khz": 6.67},
        "drive": {"spin_detuning_khz": -20.0, "tones": [{"offset_khz": 0.0}]},
        "thermal": {"nbar": {"all": 0.1}, "trials": 4, "seed": 5},
        "times": {"start_ms": 0.0, "stop_ms": 0.05, "step_ms": 0.01},
        "truncation": {"kept_modes": 2, "excitation_cap": 3},
        "output": {"spectrum_points": 101}
    })"));
}

std::string slurp_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "missing ", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& leaf) : path(fs::temp_directory_path() / leaf) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sweep value specs expand to token lists") {
    CHECK(runner::expand_values("4:12:2") ==
          std::vector<std::string>{"4", "6", "8", "10", "12"});
    CHECK(runner::expand_values("1:3") == std::vector<std::string>{"1", "2", "3"});
    CHECK(runner::expand_values("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(runner::expand_values("-50") == std::vector<std::string>{"-50"});

    for (const char* bad : {"3:1", "1:5:0", "1:2:3:4", "", "x:2"}) {
        CHECK_MESSAGE(testutil::error_code_of([&] { runner::expand_values(bad); }) ==
                          "runner/bad_sweep",
                      "spec \"", bad, "\" should be rejected");
    }
}

TEST_CASE("preparation folds the first tone into the spin frame") {
    scenario::Scenario a = tiny_scenario();
    a.tones = {{units::khz_to_rad_per_ms(0.0), 0.0, 1.0},
               {units::khz_to_rad_per_ms(20.0), 0.4, 0.7}};
    scenario::Scenario b = a;
    b.spin_detuning = units::khz_to_rad_per_ms(-10.0);
    b.tones[0].offset = units::khz_to_rad_per_ms(-10.0);
    b.tones[1].offset = units::khz_to_rad_per_ms(10.0);

    const runner::Prepared pa = runner::prepare(a);
    const runner::Prepared pb = runner::prepare(b);
    CHECK(pa.spin_detuning == doctest::Approx(pb.spin_detuning).epsilon(1e-15));
    CHECK(pa.tones[0].offset == 0.0);
    CHECK(pb.tones[0].offset == 0.0);
    CHECK(pa.tones[1].offset == doctest::Approx(pb.tones[1].offset).epsilon(1e-15));
    CHECK(pa.kept == pb.kept);
    CHECK(std::is_sorted(pa.kept.begin(), pa.kept.end()));
    CHECK(static_cast<int>(pa.kept.size()) == a.kept_modes);

    // The truncated drive carries the kept-mode frequencies and weighted couplings.
    REQUIRE(pa.drive.tones.size() == 2);
    for (std::size_t i = 0; i < pa.kept.size(); ++i) {
        const int k = pa.kept[i];
        CHECK(pa.drive.kept_freqs[static_cast<int>(i)] == pa.modes.relative_freqs[k]);
        CHECK(pa.drive.tones[1].lambdas[static_cast<int>(i)] ==
              doctest::Approx(0.7 * pa.profile.lambdas[k]).epsilon(1e-15));
    }
}

TEST_CASE("a small ensemble run produces consistent series") {
    const scenario::Scenario s = tiny_scenario();
    const runner::RunArtifacts art = runner::run_scenario(s, 1);

    REQUIRE(art.ensemble.times.size() == s.times.size());
    CHECK(art.p0_from0[0] == 1.0);
    CHECK(art.p0_from1[0] == 0.0);
    CHECK(art.absdiff[0] == 1.0);
    CHECK(art.distance[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < art.absdiff.size(); ++i) {
        CHECK(art.absdiff[i] == std::abs(art.p0_from0[i] - art.p0_from1[i]));
        CHECK(art.distance[i] >= -1e-12);
        CHECK(art.distance[i] <= 1.0 + 1e-12);
    }
    if (art.time_to_half) {
        bool seen = false;
        for (std::size_t i = 0; i < art.absdiff.size() && !seen; ++i) {
            if (art.absdiff[i] <= 0.5) {
                CHECK(art.ensemble.times[i] == *art.time_to_half);
                seen = true;
            }
        }
        CHECK(seen);
    }
    CHECK(art.ensemble.trials == 4);
    CHECK(art.ensemble.max_norm_drift < 1e-9);

    const runner::RunArtifacts again = runner::run_scenario(s, 1);
    CHECK(again.p0_from0 == art.p0_from0);
    CHECK(again.p0_from1 == art.p0_from1);
    CHECK(again.distance == art.distance);
}

TEST_CASE("run outputs land on disk and are byte reproducible") {
    const scenario::Scenario s = tiny_scenario();
    TempDir dir_a("ionsbm_run_a");
    TempDir dir_b("ionsbm_run_b");
    runner::write_run_outputs(runner::run_scenario(s, 1), dir_a.path.string());
    runner::write_run_outputs(runner::run_scenario(s, 1), dir_b.path.string());

    const std::vector<std::string> names = {"timeseries.csv", "spectrum.csv", "modes.csv",
                                            "summary.json", "plot_manifest.json"};
    for (const std::string& name : names) {
        const std::string bytes = slurp_file(dir_a.path / name);
        CHECK_MESSAGE(bytes == slurp_file(dir_b.path / name), name, " differs between runs");
    }

    const std::string ts = slurp_file(dir_a.path / "timeseries.csv");
    CHECK(ts.rfind("# ionsbm timeseries schema=1\n", 0) == 0);
    CHECK(line_count(ts) == 3 + s.times.size());
    CHECK(line_count(slurp_file(dir_a.path / "spectrum.csv")) ==
          4 + static_cast<std::size_t>(s.spectrum_points));
    CHECK(line_count(slurp_file(dir_a.path / "modes.csv")) ==
          3 + static_cast<std::size_t>(s.trap.ion_count));

    const json summary = json::parse(slurp_file(dir_a.path / "summary.json"));
    CHECK(summary["schema_version"] == 1);
    CHECK(summary["name"] == "tiny");
    CHECK(summary["scenario_hash"] == scenario::scenario_hash(s));
    CHECK(summary["trials"] == 4);
    CHECK(summary["kept_modes"].size() == 2);
    CHECK(summary["k_convergence"].is_null());
    CHECK(summary["chain"]["ion_count"] == 3);
    CHECK(summary["rejection_rate"].is_number());

    const json manifest = json::parse(slurp_file(dir_a.path / "plot_manifest.json"));
    CHECK(manifest["files"].size() == 4);
    CHECK(manifest["scenario_hash"] == summary["scenario_hash"]);
}

TEST_CASE("sweeps apply each parameter and track convergence") {
    const scenario::Scenario base = tiny_scenario();

    runner::SweepResult k_sweep = runner::run_sweep(base, "K", {"1", "2"}, 1);
    CHECK(k_sweep.points[0].prep.kept.size() == 1);
    CHECK(k_sweep.points[1].prep.kept.size() == 2);
    CHECK(std::isnan(k_sweep.max_change[0]));
    REQUIRE(!std::isnan(k_sweep.max_change[1]));
    if (k_sweep.max_change[1] < 0.02) {
        CHECK(k_sweep.converged_at == std::string("2"));
    } else {
        CHECK_FALSE(k_sweep.converged_at.has_value());
    }

    const runner::SweepResult ion_sweep = runner::run_sweep(base, "target_ion", {"center"}, 1);
    CHECK(ion_sweep.points[0].scen.target_ion == 1);

    const runner::SweepResult delta_sweep = runner::run_sweep(base, "delta", {"-35"}, 1);
    CHECK(delta_sweep.points[0].scen.spin_detuning ==
          doctest::Approx(units::khz_to_rad_per_ms(-35.0)));

    CHECK(testutil::error_code_of([&] { runner::run_sweep(base, "offset", {"10"}, 1); }) ==
          "runner/bad_sweep");
    CHECK(testutil::error_code_of([&] { runner::run_sweep(base, "K", {"9"}, 1); }) ==
          "runner/bad_sweep");
    CHECK(testutil::error_code_of([&] { runner::run_sweep(base, "nope", {"1"}, 1); }) ==
          "runner/bad_sweep");
    CHECK(testutil::error_code_of([&] { runner::run_sweep(base, "K", {}, 1); }) ==
          "runner/bad_sweep");

    TempDir dir("ionsbm_sweep");
    runner::write_sweep_outputs(k_sweep, dir.path.string());
    const std::string csv = slurp_file(dir.path / "convergence.csv");
    CHECK(line_count(csv) == 2 + k_sweep.points.size());
    const json summary = json::parse(slurp_file(dir.path / "sweep_summary.json"));
    CHECK(summary["param"] == "K");
    CHECK(summary["threshold"] == 0.02);
    REQUIRE(summary["points"].size() == 2);
    CHECK(summary["points"][0]["sweep_value"] == "1");
    CHECK(summary["points"][0]["max_change_vs_prev"].is_null());
    CHECK(summary["points"][1]["k_convergence"] == summary["converged_at"]);
    CHECK_FALSE(summary["points"][0].contains("versions"));
}

TEST_CASE("spectrum-only output skips the dynamics") {
    const scenario::Scenario s = tiny_scenario();
    TempDir dir("ionsbm_spec_only");
    runner::write_spectrum_outputs(s, dir.path.string());
    CHECK(fs::exists(dir.path / "spectrum.csv"));
    CHECK(fs::exists(dir.path / "modes.csv"));
    CHECK_FALSE(fs::exists(dir.path / "timeseries.csv"));

    const std::string spec = slurp_file(dir.path / "spectrum.csv");
    CHECK(spec.find("# validity_ratio=") != std::string::npos);
    CHECK(spec.find("omega_khz,J_khz\n") != std::string::npos);
}

TEST_CASE("shot-noise readout stays deterministic and in range") {
    scenario::Scenario s = tiny_scenario();
    s.shot_noise = 400;
    const runner::RunArtifacts art = runner::run_scenario(s, 1);
    CHECK(art.p0_from0[0] == 1.0);  // a definite outcome survives sampling
    for (std::size_t i = 0; i < art.distance.size(); ++i) {
        CHECK(art.p0_from0[i] >= 0.0);
        CHECK(art.p0_from0[i] <= 1.0);
        CHECK(art.distance[i] >= 0.0);
        CHECK(art.distance[i] <= 1.0 + 1e-12);
    }
    const runner::RunArtifacts again = runner::run_scenario(s, 1);
    CHECK(again.p0_from0 == art.p0_from0);
    CHECK(again.distance == art.distance);
}
