#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "ionsbm/basis.hpp"

namespace ionsbm::hamiltonian {

// One drive tone restricted to the kept modes. The first tone defines the rotating
// frame (offset 0); further tones enter with phase factors e^{i(offset*t + phase)}.
struct ToneCoupling {
    Eigen::VectorXd lambdas;  // signed couplings over kept modes, rad/ms
    double offset = 0.0;      // rad/ms
    double phase = 0.0;       // rad
};

// Excitation-conserving spin-boson Hamiltonian on one total-excitation subspace:
//
//   H(t) = diag(+-Delta/2 + sum_k w_k n_k)
//        + sum_j [ e^{i(delta_j t + phi_j)} B_j + h.c. ],
//
// where B_j raises the spin while removing one phonon (the sigma+ a_k part; rows in
// the excited block, columns in the ground block) with matrix elements
// (lambda_k^j / 2) sqrt(n_k). Spin basis convention: |1> is the excited state, and
// its diagonal carries +Delta/2.
//
// All tones share the same sparsity pattern, so the pattern is stored once per mode
// and each tone only contributes a time-dependent scalar per mode.
class HamiltonianOperator {
  public:
    HamiltonianOperator(std::shared_ptr<const basis::Subspace> subspace,
                        Eigen::VectorXd kept_freqs, double spin_detuning,
                        std::vector<ToneCoupling> tones);

    const basis::Subspace& subspace() const { return *subspace_; }
    std::shared_ptr<const basis::Subspace> subspace_ptr() const { return subspace_; }
    const Eigen::VectorXd& diagonal() const { return diag_; }
    double spin_detuning() const { return spin_detuning_; }
    const Eigen::VectorXd& kept_freqs() const { return kept_freqs_; }
    const std::vector<ToneCoupling>& tones() const { return tones_; }

    // True when any tone rotates relative to the frame; a static operator can be
    // propagated by exact exponentiation.
    bool time_dependent() const { return time_dependent_; }

    // out = H(t) v.
    void apply(double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const;

    // out = H_I(t) v with H_I(t) = e^{+iDt} (H(t) - D) e^{-iDt}, D the diagonal.
    // Used by the midpoint propagator; the diagonal is handled exactly outside.
    void apply_interaction(double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const;

    Eigen::MatrixXcd dense(double t) const;

    // Same couplings, new spin detuning: only the diagonal and the interaction-
    // picture phase rates change.
    HamiltonianOperator frame_shift(double new_detuning) const;

    // Gershgorin bound on the spectral radius of the full coupling part (all tones
    // at peak alignment), used for propagator step control.
    double coupling_norm_bound() const { return coupling_bound_; }
    // Fastest phase rate |(Delta - w_k) + delta_j| appearing in the interaction
    // picture, plus the largest tone offset.
    double max_phase_rate() const;

  private:
    struct ModeBlock {
        int mode = 0;     // index into the kept list
        double gap = 0.0; // Delta - w_k: diagonal difference across this block's entries
        std::vector<std::uint32_t> rows;  // excited-block state
        std::vector<std::uint32_t> cols;  // ground-block state
        Eigen::VectorXd amps;             // sqrt(n_k), coupling-independent
    };

    std::shared_ptr<const basis::Subspace> subspace_;
    Eigen::VectorXd kept_freqs_;
    double spin_detuning_;
    std::vector<ToneCoupling> tones_;
    Eigen::VectorXd diag_;
    std::vector<ModeBlock> blocks_;
    bool time_dependent_ = false;
    double coupling_bound_ = 0.0;

    void rebuild_diagonal();
    void compute_coupling_bound();
    // Combined tone coefficient for one mode at time t (Schrodinger picture).
    std::complex<double> tone_coefficient(int mode_pos, double t) const;
};

}  // namespace ionsbm::hamiltonian
