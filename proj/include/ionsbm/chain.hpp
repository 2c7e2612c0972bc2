#pragma once

#include <Eigen/Dense>
#include <optional>

namespace ionsbm::chain {

struct TrapConfig {
    int ion_count = 1;
    double transverse_freq = 0.0;  // rad/ms
    // Exactly one of the two must be set; giving a target spacing makes
    // build_chain fit the axial frequency by bisection.
    std::optional<double> axial_freq;           // rad/ms
    std::optional<double> target_mean_spacing;  // um
    double ion_mass_amu = 171.0;
    int charge = 1;
};

struct IonChain {
    TrapConfig config;
    double axial_freq = 0.0;       // rad/ms, resolved
    double length_scale = 0.0;     // um
    Eigen::VectorXd equilibrium;   // dimensionless, strictly increasing, mirror symmetric
    Eigen::VectorXd positions_um;  // length_scale * equilibrium

    double mean_spacing_um() const;
};

// Transverse normal modes. Columns of mode_matrix are the orthonormal eigenvectors,
// ordered by descending frequency so index 0 is the center-of-mass mode. Relative
// frequencies are measured from the COM mode (entry 0 is exactly zero); this is the
// frequency axis the drive detunings refer to.
struct ModeSpectrum {
    Eigen::VectorXd absolute_freqs;  // rad/ms, descending
    Eigen::VectorXd relative_freqs;  // rad/ms, absolute - COM, first entry 0
    Eigen::MatrixXd mode_matrix;     // N x N, column k = mode k
};

// Minimise sum(u_i^2)/2 + sum_{i<j} 1/|u_i - u_j| by damped Newton from a uniformly
// spaced seed. The returned positions are mirror symmetrized and satisfy
// max-norm(gradient) < 1e-10.
Eigen::VectorXd solve_equilibrium(int ion_count);

// Axial frequency whose physical chain has the requested mean nearest-neighbour
// spacing, found by bisection (spacing decreases monotonically with the frequency).
double fit_axial_frequency(int ion_count, double target_mean_spacing_um,
                           double ion_mass_amu, int charge);

IonChain build_chain(const TrapConfig& config);

// Diagonalises the transverse Hessian
//   A_ii = (wx/wz)^2 - sum_m 1/|u_i-u_m|^3,   A_ij = 1/|u_i-u_j|^3
// and scales eigenvalues to absolute frequencies w_k = wz*sqrt(mu_k). Throws
// "chain/unstable" when any mu_k <= 0. Eigenvectors are parity-symmetrized, so for
// odd N the center ion has an exact zero in every antisymmetric mode; each column's
// largest-magnitude entry is positive and the COM column is all positive.
ModeSpectrum transverse_modes(const IonChain& chain);

// Per-mode sideband rates g_k from the COM calibration g_com, using the 1/sqrt(w)
// scaling of the Lamb-Dicke parameter: g_k = g_com * sqrt(w_com / w_k).
Eigen::VectorXd lamb_dicke_scale(const ModeSpectrum& spectrum, double g_com);

}  // namespace ionsbm::chain
