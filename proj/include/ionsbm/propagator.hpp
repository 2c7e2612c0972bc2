#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ionsbm/hamiltonian.hpp"

namespace ionsbm::propagator {

struct StepControl {
    // Relative accuracy target per Krylov restart / midpoint substep exponential.
    double krylov_tol = 1e-10;
    int max_krylov_dim = 80;
    // Midpoint scheme: substep h satisfies h * (max phase rate + coupling bound)
    // <= step_limit_factor unless an explicit step is given.
    double step_limit_factor = 0.1;
    double explicit_step = 0.0;  // ms; > 0 overrides the rate-based choice
    // Static operators on subspaces at or below this dimension are propagated by
    // dense eigendecomposition instead of Krylov iteration.
    std::uint64_t dense_cutoff = 512;
    // Route static operators through the midpoint scheme (cross-validation in tests).
    bool force_midpoint = false;
};

// Cached eigendecomposition of a static Hamiltonian. Real-symmetric operators keep a
// real eigenvector matrix (half the arithmetic on every later application).
struct DenseEig {
    bool real = false;
    Eigen::VectorXd evals;
    Eigen::MatrixXd vecs_real;
    Eigen::MatrixXcd vecs_cplx;
};

// Throws "propagator/time_dependent" if the operator has rotating tones.
DenseEig dense_eigendecomposition(const hamiltonian::HamiltonianOperator& op);

Eigen::VectorXcd dense_evolve(const DenseEig& eig, const Eigen::VectorXcd& psi0, double dt);

// Called once per requested output time, in order, with psi(times[index]).
using GridSink = std::function<void(std::size_t index, const Eigen::VectorXcd& psi)>;

// Propagates psi0 from times[0] through every entry of `times` (strictly increasing;
// the first sink call reports psi0 itself). `cached` may carry the operator's dense
// eigendecomposition; pass nullptr to let the routine decide per StepControl. Static
// operators use exact exponential action (dense or restarted Lanczos with multi-time
// reuse of each Krylov subspace); rotating ones use the fixed-step midpoint-
// exponential scheme in the interaction picture of the diagonal.
void propagate_grid(const hamiltonian::HamiltonianOperator& op, const DenseEig* cached,
                    const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                    const StepControl& ctrl, const GridSink& sink);

// Single-interval convenience wrapper.
Eigen::VectorXcd propagate(const hamiltonian::HamiltonianOperator& op,
                           const Eigen::VectorXcd& psi0, double t_from, double t_to,
                           const StepControl& ctrl);

}  // namespace ionsbm::propagator
