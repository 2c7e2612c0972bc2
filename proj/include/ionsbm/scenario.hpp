#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ionsbm/chain.hpp"
#include "ionsbm/propagator.hpp"

namespace ionsbm::scenario {

// One drive component. The offset is relative to the first tone; weight scales the
// calibrated COM sideband rate for this tone.
struct Tone {
    double offset = 0.0;  // rad/ms
    double phase = 0.0;   // radians
    double weight = 1.0;
};

// Fully parsed and unit-converted run description. All frequencies are rad/ms, all
// times ms; the JSON carries kHz and ms. See parse_scenario for the schema.
struct Scenario {
    std::string name;

    chain::TrapConfig trap;
    int target_ion = 0;  // resolved index into the chain
    double com_sideband_rate = 0.0;
    double spin_detuning = 0.0;
    std::vector<Tone> tones;

    Eigen::VectorXd nbar;  // one entry per mode, mode order (descending frequency)
    int trials = 100;
    std::uint64_t seed = 0;

    std::vector<double> times;  // expanded grid, ms

    int kept_modes = 8;
    int excitation_cap = 8;
    std::uint64_t max_dimension = 5'000'000;
    propagator::StepControl step;

    int shot_noise = 0;  // projective shots per tomography axis; 0 = exact readout
    int spectrum_points = 2001;
};

// Parses and validates a scenario document. Unknown fields anywhere are rejected
// with their full path, so typos cannot silently fall back to defaults.
//
// {
//   "name": "fig2a",                                   // optional
//   "chain": {
//     "ion_count": 20,
//     "transverse_freq_khz": 2397.0,
//     "axial_freq_khz": 153.0,                         // exactly one of these two
//     "target_mean_spacing_um": 4.6,
//     "ion_mass_amu": 171.0                            // optional
//   },
//   "coupling": {
//     "target_ion": "edge" | "center" | <index>,
//     "g_com_khz": 6.67
//   },
//   "drive": {
//     "spin_detuning_khz": -20.0,
//     "tones": [{"offset_khz": 0.0, "phase_rad": 0.0, "weight": 1.0}]
//   },
//   "thermal": {
//     "nbar": {"com": 0.9, "tilt": 0.5, "rest": 0.3}   // or {"all": x} or [per mode]
//     "trials": 100,                                   // optional
//     "seed": 171                                      // optional
//   },
//   "times": {"start_ms": 0.0, "stop_ms": 0.5, "step_ms": 0.002},
//   "truncation": {                                    // optional, with defaults
//     "kept_modes": 8,                                 // default min(8, ion_count)
//     "excitation_cap": 8,
//     "dense_cutoff": 512, "max_dimension": 5000000
//   },
//   "propagation": {                                   // optional, with defaults
//     "krylov_tol": 1e-10, "max_krylov_dim": 80, "step_limit_factor": 0.1,
//     "explicit_step_ms": 0.0, "force_midpoint": false
//   },
//   "output": {"shot_noise": 0, "spectrum_points": 2001}  // optional
// }
Scenario parse_scenario(const nlohmann::json& doc);

Scenario load_scenario(const std::string& path);

// Normalized document in input units with every default materialized; two inputs
// describing the same run serialize identically (object keys are sorted).
nlohmann::json canonical_json(const Scenario& s);

// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

}  // namespace ionsbm::scenario
