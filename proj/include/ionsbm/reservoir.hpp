#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ionsbm/chain.hpp"

namespace ionsbm::reservoir {

// One bichromatic component of the drive. tone_offset is measured relative to the
// first tone, whose offset defines the rotating frame and must be zero; the effective
// detuning a tone presents to the spin is spin_detuning + tone_offset.
struct DriveTone {
    double com_sideband_rate = 0.0;  // g = eta*Omega on the COM mode, rad/ms
    double spin_detuning = 0.0;      // Delta relative to the COM mode, rad/ms
    double tone_offset = 0.0;        // delta_j, rad/ms
    double phase = 0.0;              // radians
};

// Signed per-mode couplings lambda_k = 2 g_k b[ion][k] seen by one target ion under
// one tone. The sign carries the mode-vector orientation; every spectral quantity
// uses |lambda_k|.
struct CouplingProfile {
    int target_ion = 0;
    Eigen::VectorXd lambdas;  // rad/ms, one entry per mode
};

// A sampled spectral-density curve along with the discrete lines it was built from,
// so shifted or combined variants can be re-evaluated exactly instead of
// interpolating the samples.
struct SpectralCurve {
    Eigen::VectorXd omega;   // rad/ms grid (relative frequency axis)
    Eigen::VectorXd values;  // J(omega), rad/ms
    Eigen::VectorXd line_freqs;    // line centers on the same axis
    Eigen::VectorXd line_lambdas;  // line strengths (signed)
};

struct CombinedSpectrum {
    SpectralCurve curve;
    // max over modes and tone pairs of |lambda| / |delta_j - delta_j'|; the incoherent
    // sum of per-tone spectra is trustworthy only when this is small.
    double validity_ratio = 0.0;
    bool overlap_warning = false;  // validity_ratio > 0.5
};

CouplingProfile coupling_profile(const chain::ModeSpectrum& spectrum,
                                 const Eigen::VectorXd& sideband_rates, int target_ion);

// Sum of Lorentzians, one per mode:
//   J(w) = sum_k (|l_k|^3 / sqrt(2)) / ((w - w_k)^2 + l_k^2 / 2)
// Peak height sqrt(2)|l_k|, half width |l_k|/sqrt(2), area pi l_k^2. Modes with
// l_k = 0 contribute exactly nothing.
double spectral_density_at(const Eigen::VectorXd& line_freqs,
                           const Eigen::VectorXd& line_lambdas, double omega);

SpectralCurve spectral_density(const CouplingProfile& profile,
                               const Eigen::VectorXd& relative_freqs,
                               const Eigen::VectorXd& omega_grid);

// Retuning the spin from detuning `delta` to `delta_prime` is equivalent to sliding
// the whole reservoir: J'(w) = J(w - delta + delta_prime), evaluated from the lines.
SpectralCurve shift_spectrum(const SpectralCurve& curve, double delta, double delta_prime);

// Incoherent sum of per-tone spectra, each shifted by its tone offset:
//   J_comb(w) = sum_j J_j(w + delta_j).
// With a single tone this reduces to spectral_density of that tone.
CombinedSpectrum combined_spectrum(const std::vector<CouplingProfile>& profiles,
                                   const std::vector<double>& tone_offsets,
                                   const Eigen::VectorXd& relative_freqs,
                                   const Eigen::VectorXd& omega_grid);

// 2001 uniform points spanning [min relative frequency - 10*max g, 10*max g].
Eigen::VectorXd default_omega_grid(const Eigen::VectorXd& relative_freqs,
                                   const Eigen::VectorXd& sideband_rates);

}  // namespace ionsbm::reservoir
