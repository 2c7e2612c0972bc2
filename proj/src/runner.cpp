#include "ionsbm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ionsbm/basis.hpp"
#include "ionsbm/errors.hpp"
#include "ionsbm/units.hpp"

namespace ionsbm::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kConvergenceThreshold = 0.02;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

std::string khz(double rad_per_ms) {
    return fmt(units::rad_per_ms_to_khz(rad_per_ms));
}

// Writes through a temp file in the same directory so readers never observe a
// partially written artifact.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("runner/io", "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("runner/io", "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

Eigen::VectorXd spectrum_grid(const Eigen::VectorXd& relative_freqs,
                              const Eigen::VectorXd& sideband_rates, int points) {
    const double pad = 10.0 * sideband_rates.maxCoeff();
    const double lo = relative_freqs.minCoeff() - pad;
    const double hi = pad;
    return Eigen::VectorXd::LinSpaced(points, lo, hi);
}

std::vector<Eigen::VectorXd> tone_lambda_vectors(const scenario::Scenario& s,
                                                 const Eigen::VectorXd& base_lambdas) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(s.tones.size());
    for (const scenario::Tone& tone : s.tones) out.push_back(tone.weight * base_lambdas);
    return out;
}

json revival_json(const observables::RevivalReport& r) {
    json out;
    out["collapse_time_ms"] = r.collapse_time ? json(*r.collapse_time) : json();
    out["basin_start_ms"] = r.basin_start ? json(*r.basin_start) : json();
    out["basin_end_ms"] = r.basin_end ? json(*r.basin_end) : json();
    out["t_r_ms"] = r.revival_time ? json(*r.revival_time) : json();
    out["height"] = r.revival_height ? json(*r.revival_height) : json();
    return out;
}

json summary_json(const RunArtifacts& art) {
    const scenario::Scenario& s = art.scen;
    json out;
    out["schema_version"] = 1;
    out["name"] = s.name;
    out["scenario_hash"] = scenario::scenario_hash(s);
    out["seed"] = s.seed;
    out["trials"] = art.ensemble.trials;
    out["rejection_rate"] = art.ensemble.rejection_rate;
    out["max_norm_drift"] = art.ensemble.max_norm_drift;
    out["max_dimension"] = art.ensemble.max_dimension;

    json chain;
    chain["ion_count"] = s.trap.ion_count;
    chain["transverse_freq_khz"] = units::rad_per_ms_to_khz(s.trap.transverse_freq);
    chain["axial_freq_khz"] = units::rad_per_ms_to_khz(art.prep.ions.axial_freq);
    chain["mean_spacing_um"] = art.prep.ions.mean_spacing_um();
    chain["length_scale_um"] = art.prep.ions.length_scale;
    out["chain"] = chain;

    out["target_ion"] = s.target_ion;
    out["spin_detuning_khz"] = units::rad_per_ms_to_khz(art.prep.spin_detuning);
    out["tones"] = json::array();
    for (const scenario::Tone& t : art.prep.tones) {
        out["tones"].push_back({{"offset_khz", units::rad_per_ms_to_khz(t.offset)},
                                {"phase_rad", t.phase},
                                {"weight", t.weight}});
    }
    out["kept_modes"] = art.prep.kept;
    json kept_khz = json::array();
    for (int k : art.prep.kept) {
        kept_khz.push_back(units::rad_per_ms_to_khz(art.prep.modes.relative_freqs[k]));
    }
    out["kept_relative_khz"] = kept_khz;

    out["validity_ratio"] = std::isfinite(art.spectrum.validity_ratio)
                                ? json(art.spectrum.validity_ratio)
                                : json("inf");
    out["overlap_warning"] = art.spectrum.overlap_warning;

    out["revival"] = revival_json(art.revival);
    out["distance_revival"] = revival_json(art.distance_revival);
    out["time_to_half_ms"] = art.time_to_half ? json(*art.time_to_half) : json();
    out["k_convergence"] = json();

    json versions;
    versions["ionsbm"] = "1.0.0";
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    out["versions"] = versions;
    return out;
}

std::string meta_line(const scenario::Scenario& s) {
    return "# scenario=" + (s.name.empty() ? std::string("unnamed") : s.name) +
           " hash=" + scenario::scenario_hash(s) + " seed=" + std::to_string(s.seed) + "\n";
}

std::string timeseries_csv(const RunArtifacts& art) {
    std::string out;
    out += "# ionsbm timeseries schema=1\n";
    out += meta_line(art.scen);
    out += "t_ms,p0_from0,p0_from1,absdiff,distance,se_absdiff,se_distance\n";
    const std::size_t n = art.ensemble.times.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += fmt(art.ensemble.times[i]) + "," + fmt(art.p0_from0[i]) + "," +
               fmt(art.p0_from1[i]) + "," + fmt(art.absdiff[i]) + "," + fmt(art.distance[i]) +
               "," + fmt(art.ensemble.se_population_diff[i]) + "," +
               fmt(art.ensemble.se_trace_distance[i]) + "\n";
    }
    return out;
}

std::string spectrum_csv(const scenario::Scenario& s, const reservoir::CombinedSpectrum& spec) {
    std::string out;
    out += "# ionsbm spectrum schema=1\n";
    out += meta_line(s);
    out += "# validity_ratio=" +
           (std::isfinite(spec.validity_ratio) ? fmt(spec.validity_ratio) : std::string("inf")) +
           " overlap_warning=" + (spec.overlap_warning ? "1" : "0") + "\n";
    out += "omega_khz,J_khz\n";
    for (int i = 0; i < spec.curve.omega.size(); ++i) {
        out += khz(spec.curve.omega[i]) + "," + khz(spec.curve.values[i]) + "\n";
    }
    return out;
}

std::string modes_csv(const scenario::Scenario& s, const Prepared& prep) {
    const basis::ModeWeights weights = [&] {
        std::vector<double> offsets;
        for (const scenario::Tone& t : prep.tones) offsets.push_back(t.offset);
        return basis::mode_weights_multitone(tone_lambda_vectors(s, prep.profile.lambdas),
                                             prep.modes.relative_freqs, prep.spin_detuning,
                                             offsets);
    }();
    std::string out;
    out += "# ionsbm modes schema=1\n";
    out += meta_line(s);
    out += "mode,absolute_khz,relative_khz,g_khz,lambda_khz,nbar,weight,kept\n";
    const int n = prep.modes.absolute_freqs.size();
    for (int k = 0; k < n; ++k) {
        const bool kept = std::find(prep.kept.begin(), prep.kept.end(), k) != prep.kept.end();
        out += std::to_string(k) + "," + khz(prep.modes.absolute_freqs[k]) + "," +
               khz(prep.modes.relative_freqs[k]) + "," + khz(prep.sideband_rates[k]) + "," +
               khz(prep.profile.lambdas[k]) + "," + fmt(s.nbar[k]) + "," +
               fmt(weights.values[k]) + "," + (kept ? "1" : "0") + "\n";
    }
    return out;
}

json plot_manifest(const RunArtifacts& art) {
    json files = json::array();
    files.push_back({{"path", "timeseries.csv"},
                     {"kind", "timeseries"},
                     {"x", "t_ms"},
                     {"series", json::array({{{"y", "p0_from0"}},
                                             {{"y", "p0_from1"}},
                                             {{"y", "absdiff"}, {"err", "se_absdiff"}},
                                             {{"y", "distance"}, {"err", "se_distance"}}})}});
    files.push_back({{"path", "spectrum.csv"},
                     {"kind", "spectrum"},
                     {"x", "omega_khz"},
                     {"series", json::array({{{"y", "J_khz"}}})}});
    files.push_back({{"path", "modes.csv"}, {"kind", "table"}});
    files.push_back({{"path", "summary.json"}, {"kind", "summary"}});
    json out;
    out["schema_version"] = 1;
    out["name"] = art.scen.name;
    out["scenario_hash"] = scenario::scenario_hash(art.scen);
    out["files"] = files;
    return out;
}

int parse_int_token(const std::string& token, const std::string& what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw Error("runner/bad_sweep", what + ": expected an integer, got \"" + token + "\"");
    }
}

double parse_double_token(const std::string& token, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw Error("runner/bad_sweep", what + ": expected a number, got \"" + token + "\"");
    }
}

scenario::Scenario apply_param(const scenario::Scenario& base, const std::string& param,
                               const std::string& token) {
    scenario::Scenario s = base;
    if (param == "K") {
        const int k = parse_int_token(token, "K");
        if (k < 1 || k > s.trap.ion_count) throw Error("runner/bad_sweep", "K out of range");
        s.kept_modes = k;
    } else if (param == "delta") {
        s.spin_detuning = units::khz_to_rad_per_ms(parse_double_token(token, "delta"));
    } else if (param == "offset") {
        if (s.tones.size() < 2) {
            throw Error("runner/bad_sweep", "offset sweeps need at least two tones");
        }
        s.tones.back().offset = units::khz_to_rad_per_ms(parse_double_token(token, "offset"));
    } else if (param == "trials") {
        const int t = parse_int_token(token, "trials");
        if (t < 1) throw Error("runner/bad_sweep", "trials must be positive");
        s.trials = t;
    } else if (param == "target_ion") {
        if (token == "edge") {
            s.target_ion = 0;
        } else if (token == "center") {
            s.target_ion = (s.trap.ion_count - 1) / 2;
        } else {
            const int idx = parse_int_token(token, "target_ion");
            if (idx < 0 || idx >= s.trap.ion_count) {
                throw Error("runner/bad_sweep", "target_ion out of range");
            }
            s.target_ion = idx;
        }
    } else {
        throw Error("runner/bad_sweep", "unknown sweep parameter \"" + param + "\"");
    }
    return s;
}

}  // namespace

Prepared prepare(const scenario::Scenario& s) {
    Prepared prep;
    prep.ions = chain::build_chain(s.trap);
    prep.modes = chain::transverse_modes(prep.ions);
    prep.sideband_rates = chain::lamb_dicke_scale(prep.modes, s.com_sideband_rate);
    prep.profile = reservoir::coupling_profile(prep.modes, prep.sideband_rates, s.target_ion);

    // Fold the first tone's offset into the spin detuning so the operator sees a
    // static first tone; observables on populations and coherence magnitudes are
    // unchanged by this gauge choice.
    const double frame = s.tones.front().offset;
    prep.spin_detuning = s.spin_detuning + frame;
    prep.tones = s.tones;
    for (scenario::Tone& t : prep.tones) t.offset -= frame;

    std::vector<double> offsets;
    for (const scenario::Tone& t : prep.tones) offsets.push_back(t.offset);
    const basis::ModeWeights weights =
        basis::mode_weights_multitone(tone_lambda_vectors(s, prep.profile.lambdas),
                                      prep.modes.relative_freqs, prep.spin_detuning, offsets);
    basis::ModeSubset subset = basis::select_modes(weights, s.kept_modes);
    prep.kept = subset.kept;
    std::sort(prep.kept.begin(), prep.kept.end());

    const int kcount = static_cast<int>(prep.kept.size());
    prep.drive.kept_freqs.resize(kcount);
    for (int i = 0; i < kcount; ++i) {
        prep.drive.kept_freqs[i] = prep.modes.relative_freqs[prep.kept[i]];
    }
    prep.drive.spin_detuning = prep.spin_detuning;
    for (const scenario::Tone& tone : prep.tones) {
        hamiltonian::ToneCoupling coupling;
        coupling.offset = tone.offset;
        coupling.phase = tone.phase;
        coupling.lambdas.resize(kcount);
        for (int i = 0; i < kcount; ++i) {
            coupling.lambdas[i] = tone.weight * prep.profile.lambdas[prep.kept[i]];
        }
        prep.drive.tones.push_back(coupling);
    }
    prep.drive.step = s.step;
    prep.drive.max_dimension = s.max_dimension;
    return prep;
}

reservoir::CombinedSpectrum drive_spectrum(const scenario::Scenario& s, const Prepared& prep) {
    std::vector<reservoir::CouplingProfile> profiles;
    std::vector<double> offsets;
    for (const scenario::Tone& tone : prep.tones) {
        reservoir::CouplingProfile p = prep.profile;
        p.lambdas *= tone.weight;
        profiles.push_back(std::move(p));
        offsets.push_back(tone.offset);
    }
    const Eigen::VectorXd grid =
        spectrum_grid(prep.modes.relative_freqs, prep.sideband_rates, s.spectrum_points);
    return reservoir::combined_spectrum(profiles, offsets, prep.modes.relative_freqs, grid);
}

RunArtifacts run_scenario(const scenario::Scenario& s, int threads) {
    RunArtifacts art;
    art.scen = s;
    art.prep = prepare(s);
    art.spectrum = drive_spectrum(s, art.prep);

    evolve::SectorProvider provider(art.prep.drive);
    evolve::ThermalSpec thermal;
    thermal.nbar = s.nbar;
    thermal.trials = s.trials;
    thermal.seed = s.seed;
    thermal.excitation_cap = s.excitation_cap;
    art.ensemble = evolve::run_ensemble(thermal, art.prep.kept, provider, s.times, threads);

    const std::size_t n = art.ensemble.times.size();
    art.p0_from0.resize(n);
    art.p0_from1.resize(n);
    art.absdiff.resize(n);
    art.distance.resize(n);
    const auto& mean = art.ensemble.mean_rho;
    const int zero = static_cast<int>(evolve::InitialSpin::Zero);
    const int one = static_cast<int>(evolve::InitialSpin::One);
    const int plus = static_cast<int>(evolve::InitialSpin::Plus);
    const int minus = static_cast<int>(evolve::InitialSpin::Minus);

    if (s.shot_noise > 0) {
        Rng rng(s.seed, 0x73686f74ull);  // independent stream for readout noise
        for (std::size_t i = 0; i < n; ++i) {
            const double mz0 = observables::simulate_measurement(
                mean[zero][i], observables::Axis::Z, s.shot_noise, rng);
            const double mz1 = observables::simulate_measurement(
                mean[one][i], observables::Axis::Z, s.shot_noise, rng);
            art.p0_from0[i] = 0.5 * (1.0 + mz0);
            art.p0_from1[i] = 0.5 * (1.0 + mz1);
            Eigen::Matrix2cd rec[2];
            for (int b = 0; b < 2; ++b) {
                const Eigen::Matrix2cd& rho = mean[b == 0 ? plus : minus][i];
                const double sx = observables::simulate_measurement(rho, observables::Axis::X,
                                                                    s.shot_noise, rng);
                const double sy = observables::simulate_measurement(rho, observables::Axis::Y,
                                                                    s.shot_noise, rng);
                const double sz = observables::simulate_measurement(rho, observables::Axis::Z,
                                                                    s.shot_noise, rng);
                rec[b] = observables::tomography_reconstruct(sx, sy, sz).rho;
            }
            art.distance[i] = observables::trace_distance(rec[0], rec[1]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            art.p0_from0[i] = observables::p0(mean[zero][i]);
            art.p0_from1[i] = observables::p0(mean[one][i]);
            art.distance[i] = observables::trace_distance(mean[plus][i], mean[minus][i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        art.absdiff[i] = std::abs(art.p0_from0[i] - art.p0_from1[i]);
    }

    art.revival = observables::revival_detect(art.ensemble.times, art.absdiff);
    art.distance_revival = observables::revival_detect(art.ensemble.times, art.distance);
    for (std::size_t i = 0; i < n; ++i) {
        if (art.absdiff[i] <= 0.5) {
            art.time_to_half = art.ensemble.times[i];
            break;
        }
    }
    return art;
}

void write_run_outputs(const RunArtifacts& art, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_atomic(dir / "timeseries.csv", timeseries_csv(art));
    write_atomic(dir / "spectrum.csv", spectrum_csv(art.scen, art.spectrum));
    write_atomic(dir / "modes.csv", modes_csv(art.scen, art.prep));
    write_atomic(dir / "summary.json", summary_json(art).dump(2) + "\n");
    write_atomic(dir / "plot_manifest.json", plot_manifest(art).dump(2) + "\n");
}

SweepResult run_sweep(const scenario::Scenario& base, const std::string& param,
                      const std::vector<std::string>& values, int threads) {
    if (values.empty()) throw Error("runner/bad_sweep", "no sweep values given");
    SweepResult sweep;
    sweep.param = param;
    sweep.labels = values;
    for (const std::string& token : values) {
        const scenario::Scenario s = apply_param(base, param, token);
        sweep.points.push_back(run_scenario(s, threads));
    }
    sweep.max_change.assign(values.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        double change = 0.0;
        const auto& prev = sweep.points[i - 1].absdiff;
        const auto& cur = sweep.points[i].absdiff;
        for (std::size_t t = 0; t < cur.size(); ++t) {
            change = std::max(change, std::abs(cur[t] - prev[t]));
        }
        sweep.max_change[i] = change;
        if (!sweep.converged_at && change < kConvergenceThreshold) {
            sweep.converged_at = sweep.labels[i];
        }
    }
    return sweep;
}

void write_sweep_outputs(const SweepResult& sweep, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    std::string csv;
    csv += "# ionsbm sweep schema=1 param=" + sweep.param + "\n";
    csv += "value,max_change_vs_prev,collapse_time_ms,t_r_ms,revival_height,time_to_half_ms\n";
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        const RunArtifacts& art = sweep.points[i];
        auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
        csv += sweep.labels[i] + "," +
               (std::isnan(sweep.max_change[i]) ? std::string() : fmt(sweep.max_change[i])) +
               "," + opt(art.revival.collapse_time) + "," + opt(art.revival.revival_time) + "," +
               opt(art.revival.revival_height) + "," + opt(art.time_to_half) + "\n";
    }
    write_atomic(dir / "convergence.csv", csv);

    json out;
    out["schema_version"] = 1;
    out["param"] = sweep.param;
    out["values"] = sweep.labels;
    out["threshold"] = kConvergenceThreshold;
    out["converged_at"] = sweep.converged_at ? json(*sweep.converged_at) : json();
    json points = json::array();
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        json p = summary_json(sweep.points[i]);
        p.erase("versions");
        p["sweep_value"] = sweep.labels[i];
        p["max_change_vs_prev"] =
            std::isnan(sweep.max_change[i]) ? json() : json(sweep.max_change[i]);
        if (sweep.param == "K") p["k_convergence"] = out["converged_at"];
        points.push_back(p);
    }
    out["points"] = points;
    write_atomic(dir / "sweep_summary.json", out.dump(2) + "\n");
}

void write_spectrum_outputs(const scenario::Scenario& s, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const Prepared prep = prepare(s);
    write_atomic(dir / "spectrum.csv", spectrum_csv(s, drive_spectrum(s, prep)));
    write_atomic(dir / "modes.csv", modes_csv(s, prep));
}

std::vector<std::string> expand_values(const std::string& spec) {
    std::vector<std::string> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() < 2 || parts.size() > 3) {
            throw Error("runner/bad_sweep", "range syntax is start:stop or start:stop:step");
        }
        const double start = parse_double_token(parts[0], "range start");
        const double stop = parse_double_token(parts[1], "range stop");
        const double step = parts.size() == 3 ? parse_double_token(parts[2], "range step") : 1.0;
        if (step <= 0.0 || stop < start) {
            throw Error("runner/bad_sweep", "range must ascend with a positive step");
        }
        for (double v = start; v <= stop + 1e-9 * std::max(1.0, std::abs(stop)); v += step) {
            out.push_back(fmt(v));
        }
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw Error("runner/bad_sweep", "no sweep values given");
    return out;
}

}  // namespace ionsbm::runner
