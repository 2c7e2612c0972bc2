#include "ionsbm/reservoir.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ionsbm/errors.hpp"

namespace ionsbm::reservoir {

CouplingProfile coupling_profile(const chain::ModeSpectrum& spectrum,
                                 const Eigen::VectorXd& sideband_rates, int target_ion) {
    const int n = static_cast<int>(spectrum.mode_matrix.rows());
    if (target_ion < 0 || target_ion >= n)
        throw Error("reservoir/bad_ion",
                    "target ion " + std::to_string(target_ion) + " outside chain of " +
                        std::to_string(n) + " ions");
    if (sideband_rates.size() != n)
        throw Error("reservoir/bad_rates", "sideband rate per mode required");

    CouplingProfile profile;
    profile.target_ion = target_ion;
    profile.lambdas =
        (2.0 * sideband_rates.array() * spectrum.mode_matrix.row(target_ion).transpose().array())
            .matrix();
    return profile;
}

double spectral_density_at(const Eigen::VectorXd& line_freqs,
                           const Eigen::VectorXd& line_lambdas, double omega) {
    double j = 0.0;
    for (int k = 0; k < line_freqs.size(); ++k) {
        const double l = std::abs(line_lambdas[k]);
        if (l == 0.0) continue;
        const double d = omega - line_freqs[k];
        j += (l * l * l / std::sqrt(2.0)) / (d * d + 0.5 * l * l);
    }
    return j;
}

SpectralCurve spectral_density(const CouplingProfile& profile,
                               const Eigen::VectorXd& relative_freqs,
                               const Eigen::VectorXd& omega_grid) {
    if (relative_freqs.size() != profile.lambdas.size())
        throw Error("reservoir/bad_profile", "mode count mismatch between freqs and couplings");

    SpectralCurve curve;
    curve.omega = omega_grid;
    curve.line_freqs = relative_freqs;
    curve.line_lambdas = profile.lambdas;
    curve.values.resize(omega_grid.size());
    for (int i = 0; i < omega_grid.size(); ++i)
        curve.values[i] = spectral_density_at(curve.line_freqs, curve.line_lambdas, omega_grid[i]);
    return curve;
}

SpectralCurve shift_spectrum(const SpectralCurve& curve, double delta, double delta_prime) {
    const double shift = delta - delta_prime;  // J'(w) = J(w - shift)
    SpectralCurve out;
    out.omega = curve.omega;
    out.line_freqs = (curve.line_freqs.array() + shift).matrix();
    out.line_lambdas = curve.line_lambdas;
    out.values.resize(curve.omega.size());
    for (int i = 0; i < curve.omega.size(); ++i)
        out.values[i] = spectral_density_at(out.line_freqs, out.line_lambdas, curve.omega[i]);
    return out;
}

CombinedSpectrum combined_spectrum(const std::vector<CouplingProfile>& profiles,
                                   const std::vector<double>& tone_offsets,
                                   const Eigen::VectorXd& relative_freqs,
                                   const Eigen::VectorXd& omega_grid) {
    if (profiles.empty()) throw Error("reservoir/bad_profile", "at least one tone required");
    if (profiles.size() != tone_offsets.size())
        throw Error("reservoir/bad_profile", "one tone offset per profile required");

    const int n_tones = static_cast<int>(profiles.size());
    const int n_modes = static_cast<int>(relative_freqs.size());

    CombinedSpectrum combined;
    combined.curve.omega = omega_grid;
    // Tone j's lines appear at w_k - delta_j on the common axis.
    combined.curve.line_freqs.resize(n_tones * n_modes);
    combined.curve.line_lambdas.resize(n_tones * n_modes);
    for (int j = 0; j < n_tones; ++j) {
        if (profiles[j].lambdas.size() != n_modes)
            throw Error("reservoir/bad_profile", "mode count mismatch in tone " + std::to_string(j));
        for (int k = 0; k < n_modes; ++k) {
            combined.curve.line_freqs[j * n_modes + k] = relative_freqs[k] - tone_offsets[j];
            combined.curve.line_lambdas[j * n_modes + k] = profiles[j].lambdas[k];
        }
    }
    combined.curve.values.resize(omega_grid.size());
    for (int i = 0; i < omega_grid.size(); ++i)
        combined.curve.values[i] = spectral_density_at(combined.curve.line_freqs,
                                                       combined.curve.line_lambdas, omega_grid[i]);

    double ratio = 0.0;
    for (int j = 0; j < n_tones; ++j) {
        for (int jp = 0; jp < n_tones; ++jp) {
            if (jp == j) continue;
            const double sep = std::abs(tone_offsets[j] - tone_offsets[jp]);
            const double lmax = profiles[j].lambdas.cwiseAbs().maxCoeff();
            // Coincident tones are legal for the dynamics (they merge coherently) but
            // the incoherent spectral sum is meaningless there: ratio becomes inf.
            ratio = std::max(ratio, sep > 0.0 ? lmax / sep
                                              : std::numeric_limits<double>::infinity());
        }
    }
    combined.validity_ratio = ratio;
    combined.overlap_warning = ratio > 0.5;
    return combined;
}

Eigen::VectorXd default_omega_grid(const Eigen::VectorXd& relative_freqs,
                                   const Eigen::VectorXd& sideband_rates) {
    const double g_max = sideband_rates.cwiseAbs().maxCoeff();
    const double lo = relative_freqs.minCoeff() - 10.0 * g_max;
    const double hi = 10.0 * g_max;
    return Eigen::VectorXd::LinSpaced(2001, lo, hi);
}

}  // namespace ionsbm::reservoir
