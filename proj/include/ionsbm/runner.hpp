#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ionsbm/chain.hpp"
#include "ionsbm/evolve.hpp"
#include "ionsbm/observables.hpp"
#include "ionsbm/reservoir.hpp"
#include "ionsbm/scenario.hpp"

namespace ionsbm::runner {

// Everything derived from a scenario before any dynamics: the chain, its modes, the
// coupling profile of the target ion, and the truncated drive model. Tone offsets
// are normalized to the frame of the first tone (its offset is folded into the spin
// detuning), which leaves populations and coherence magnitudes unchanged.
struct Prepared {
    chain::IonChain ions;
    chain::ModeSpectrum modes;
    Eigen::VectorXd sideband_rates;        // g_k per mode
    reservoir::CouplingProfile profile;    // target-ion couplings, every mode
    double spin_detuning = 0.0;            // after frame normalization
    std::vector<scenario::Tone> tones;     // after frame normalization
    std::vector<int> kept;                 // kept mode indices, ascending
    evolve::DriveScenario drive;
};

Prepared prepare(const scenario::Scenario& s);

reservoir::CombinedSpectrum drive_spectrum(const scenario::Scenario& s, const Prepared& prep);

// One completed ensemble run plus the per-time series derived from it.
struct RunArtifacts {
    scenario::Scenario scen;  // as run (seed overrides already applied)
    Prepared prep;
    evolve::EnsembleResult ensemble;

    std::vector<double> p0_from0;  // P(|0>) starting from |0>
    std::vector<double> p0_from1;  //   and from |1>
    std::vector<double> absdiff;   // |p0_from0 - p0_from1|
    std::vector<double> distance;  // trace distance of the mean |+> / |-> states

    observables::RevivalReport revival;           // collapse/revival of absdiff
    observables::RevivalReport distance_revival;  // same for the distance curve
    std::optional<double> time_to_half;           // first time absdiff <= 0.5

    reservoir::CombinedSpectrum spectrum;
};

RunArtifacts run_scenario(const scenario::Scenario& s, int threads);

// timeseries.csv, spectrum.csv, modes.csv, summary.json, plot_manifest.json.
// Files are written atomically (tmp + rename) under out_dir, created if needed.
void write_run_outputs(const RunArtifacts& art, const std::string& out_dir);

// Parameter sweep over one scenario knob. Supported params: "K" (kept modes),
// "delta" (spin detuning, kHz), "offset" (last tone's offset, kHz), "trials",
// "target_ion" (edge/center/index).
struct SweepResult {
    std::string param;
    std::vector<std::string> labels;          // one per point, as given
    std::vector<RunArtifacts> points;
    std::vector<double> max_change;           // max-over-time absdiff change vs the
                                              // previous point; NaN for the first
    std::optional<std::string> converged_at;  // first label with max_change < 0.02
};

SweepResult run_sweep(const scenario::Scenario& base, const std::string& param,
                      const std::vector<std::string>& values, int threads);

// convergence.csv and sweep_summary.json under out_dir.
void write_sweep_outputs(const SweepResult& sweep, const std::string& out_dir);

// spectrum.csv and modes.csv only; no dynamics.
void write_spectrum_outputs(const scenario::Scenario& s, const std::string& out_dir);

// "a,b,c" or "a:b" or "a:b:c" (inclusive range with step c) into tokens.
std::vector<std::string> expand_values(const std::string& spec);

}  // namespace ionsbm::runner
