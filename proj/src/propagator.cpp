#include "ionsbm/propagator.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "ionsbm/errors.hpp"

namespace ionsbm::propagator {

using std::complex;
namespace {

constexpr complex<double> kI{0.0, 1.0};

bool tones_all_real(const hamiltonian::HamiltonianOperator& op) {
    for (const auto& tone : op.tones())
        if (std::sin(tone.phase) != 0.0) return false;
    return true;
}

// Hermitian Lanczos factorization with one full classical Gram-Schmidt pass per
// iteration on top of the three-term recurrence. The projected matrix is real
// symmetric tridiagonal even for complex Hermitian operators.
struct Lanczos {
    Eigen::MatrixXcd v;    // D x m orthonormal columns
    Eigen::VectorXd alpha; // m diagonal entries
    Eigen::VectorXd beta;  // m-1 subdiagonal entries
    int m = 0;
    bool invariant = false;  // Krylov space closed; the factorization is exact
    double seed_norm = 0.0;

    // Eigendecomposition of the leading j x j block of T.
    void eig_block(int j, Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) const {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j, j);
        for (int i = 0; i < j; ++i) t(i, i) = alpha[i];
        for (int i = 0; i + 1 < j; ++i) {
            t(i, i + 1) = beta[i];
            t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
        evals = solver.eigenvalues();
        evecs = solver.eigenvectors();
    }
};

using ApplyFn = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

Lanczos build_lanczos(const ApplyFn& apply, const Eigen::VectorXcd& seed, int m_cap) {
    Lanczos lz;
    const auto dim = seed.size();
    m_cap = static_cast<int>(std::min<std::int64_t>(m_cap, dim));
    lz.seed_norm = seed.norm();
    if (lz.seed_norm == 0.0) throw Error("propagator/zero_state", "cannot propagate a zero state");

    lz.v.resize(dim, m_cap);
    lz.alpha.resize(m_cap);
    lz.beta.resize(std::max(0, m_cap - 1));
    lz.v.col(0) = seed / lz.seed_norm;

    Eigen::VectorXcd w(dim);
    for (int j = 0; j < m_cap; ++j) {
        apply(lz.v.col(j), w);
        if (j > 0) w -= lz.beta[j - 1] * lz.v.col(j - 1);
        lz.alpha[j] = w.dot(lz.v.col(j)).real();
        w -= lz.alpha[j] * lz.v.col(j);
        // Full reorthogonalization pass keeps the basis usable at tight tolerances.
        w -= lz.v.leftCols(j + 1) * (lz.v.leftCols(j + 1).adjoint() * w);
        lz.m = j + 1;
        if (j + 1 == m_cap) break;
        const double b = w.norm();
        if (b < 1e-13 * std::max(1.0, lz.alpha.head(lz.m).cwiseAbs().maxCoeff())) {
            lz.invariant = true;
            break;
        }
        lz.beta[j] = b;
        lz.v.col(j + 1) = w / b;
    }
    if (lz.m == static_cast<int>(dim)) lz.invariant = true;
    return lz;
}

// Small-space coefficients of exp(-i tau T) e1, scaled back to the seed norm.
Eigen::VectorXcd small_exp(const Eigen::VectorXd& evals, const Eigen::MatrixXd& evecs,
                           double tau, double scale) {
    const Eigen::VectorXcd phases =
        (-kI * tau * evals.array().cast<complex<double>>()).exp() *
        evecs.row(0).transpose().array().cast<complex<double>>();
    return scale * (evecs.cast<complex<double>>() * phases).eval();
}

// Relative truncation estimate for exp(-i tau T) e1: difference against the same
// computation in a two-vector smaller space. Exact factorizations report zero.
struct ExpEstimator {
    const Lanczos& lz;
    Eigen::VectorXd evals_full, evals_trunc;
    Eigen::MatrixXd evecs_full, evecs_trunc;
    bool has_trunc = false;

    explicit ExpEstimator(const Lanczos& l) : lz(l) {
        lz.eig_block(lz.m, evals_full, evecs_full);
        if (!lz.invariant && lz.m > 2) {
            lz.eig_block(lz.m - 2, evals_trunc, evecs_trunc);
            has_trunc = true;
        }
    }

    Eigen::VectorXcd coeffs(double tau) const {
        return small_exp(evals_full, evecs_full, tau, lz.seed_norm);
    }

    double error(double tau) const {
        if (lz.invariant) return 0.0;
        if (!has_trunc) return 1.0;
        Eigen::VectorXcd full = small_exp(evals_full, evecs_full, tau, 1.0);
        Eigen::VectorXcd trunc = small_exp(evals_trunc, evecs_trunc, tau, 1.0);
        double err2 = 0.0;
        for (int i = 0; i < lz.m; ++i) {
            const complex<double> t = i < lz.m - 2 ? trunc[i] : complex<double>{0.0, 0.0};
            err2 += std::norm(full[i] - t);
        }
        return std::sqrt(err2);
    }
};

// w = exp(-i dt H) v for a fixed Hermitian apply, growing the Krylov space until the
// truncation estimate meets tol.
Eigen::VectorXcd lanczos_expm(const ApplyFn& apply, const Eigen::VectorXcd& v, double dt,
                              const StepControl& ctrl) {
    int m_cap = 12;
    while (true) {
        const Lanczos lz = build_lanczos(apply, v, m_cap);
        const ExpEstimator est(lz);
        if (est.error(dt) <= ctrl.krylov_tol || lz.invariant)
            return lz.v.leftCols(lz.m) * est.coeffs(dt);
        if (m_cap >= ctrl.max_krylov_dim)
            throw Error("propagator/no_convergence",
                        "Krylov exponential did not converge at dimension " +
                            std::to_string(m_cap) + "; reduce the step");
        m_cap = std::min(ctrl.max_krylov_dim, m_cap * 2);
    }
}

void propagate_grid_static_lanczos(const hamiltonian::HamiltonianOperator& op,
                                   const Eigen::VectorXcd& psi0,
                                   const std::vector<double>& times, const StepControl& ctrl,
                                   const GridSink& sink) {
    ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply(0.0, x, y); };

    Eigen::VectorXcd psi = psi0;
    double t_cur = times[0];
    std::size_t next = 1;
    sink(0, psi);

    // Each restart builds one Krylov space and serves every grid time within its
    // accuracy horizon before advancing.
    while (next < times.size()) {
        const Lanczos lz = build_lanczos(apply, psi, ctrl.max_krylov_dim);
        const ExpEstimator est(lz);

        std::size_t covered = next;
        while (covered < times.size() && est.error(times[covered] - t_cur) <= ctrl.krylov_tol)
            ++covered;

        if (covered == next) {
            // Not even the nearest grid time converged: advance by a shorter internal
            // substep and retry from the new state.
            double tau = times[next] - t_cur;
            int halvings = 0;
            while (est.error(tau) > ctrl.krylov_tol && halvings < 60) {
                tau *= 0.5;
                ++halvings;
            }
            if (halvings >= 60)
                throw Error("propagator/no_convergence", "Krylov substep underflow");
            psi = lz.v.leftCols(lz.m) * est.coeffs(tau);
            t_cur += tau;
            continue;
        }

        for (std::size_t i = next; i < covered; ++i)
            sink(i, lz.v.leftCols(lz.m) * est.coeffs(times[i] - t_cur));
        // Restart exactly from the last emitted grid state.
        psi = lz.v.leftCols(lz.m) * est.coeffs(times[covered - 1] - t_cur);
        t_cur = times[covered - 1];
        next = covered;
    }
}

void propagate_grid_dense(const DenseEig& eig, const Eigen::VectorXcd& psi0,
                          const std::vector<double>& times, const GridSink& sink) {
    sink(0, psi0);
    for (std::size_t i = 1; i < times.size(); ++i)
        sink(i, dense_evolve(eig, psi0, times[i] - times[0]));
}

void propagate_grid_midpoint(const hamiltonian::HamiltonianOperator& op,
                             const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                             const StepControl& ctrl, const GridSink& sink) {
    // Work in the interaction picture of the diagonal: psi(t) = e^{-iDt} phi(t).
    // The midpoint exponential then only sees the coupling part, whose phase rates
    // and norm set the step, not the (much larger) diagonal spread.
    const Eigen::VectorXd& diag = op.diagonal();
    double h_base = ctrl.explicit_step;
    if (h_base <= 0.0) {
        const double rate = op.max_phase_rate() + op.coupling_norm_bound();
        h_base = rate > 0.0 ? ctrl.step_limit_factor / rate
                            : times.back() - times.front();
        if (h_base <= 0.0) h_base = 1.0;
    }

    auto to_schrodinger = [&diag](const Eigen::VectorXcd& phi, double t) {
        return ((-kI * t * diag.array().cast<complex<double>>()).exp() * phi.array()).matrix().eval();
    };

    Eigen::VectorXcd phi =
        ((kI * times[0] * diag.array().cast<complex<double>>()).exp() * psi0.array()).matrix();
    sink(0, psi0);

    Eigen::VectorXcd hphi(phi.size());
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double t_a = times[i - 1];
        const double t_b = times[i];
        const int nsub = std::max(1, static_cast<int>(std::ceil((t_b - t_a) / h_base)));
        const double h = (t_b - t_a) / nsub;
        for (int s = 0; s < nsub; ++s) {
            const double t_mid = t_a + (s + 0.5) * h;
            ApplyFn apply = [&op, t_mid](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
                op.apply_interaction(t_mid, x, y);
            };
            phi = lanczos_expm(apply, phi, h, ctrl);
        }
        sink(i, to_schrodinger(phi, t_b));
    }
}

}  // namespace

DenseEig dense_eigendecomposition(const hamiltonian::HamiltonianOperator& op) {
    if (op.time_dependent())
        throw Error("propagator/time_dependent",
                    "dense eigendecomposition only applies to static operators");

    DenseEig eig;
    eig.real = tones_all_real(op);
    const Eigen::MatrixXcd h = op.dense(0.0);
    if (eig.real) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
        if (solver.info() != Eigen::Success)
            throw Error("propagator/eig_failed", "dense eigendecomposition failed");
        eig.evals = solver.eigenvalues();
        eig.vecs_real = solver.eigenvectors();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
        if (solver.info() != Eigen::Success)
            throw Error("propagator/eig_failed", "dense eigendecomposition failed");
        eig.evals = solver.eigenvalues();
        eig.vecs_cplx = solver.eigenvectors();
    }
    return eig;
}

Eigen::VectorXcd dense_evolve(const DenseEig& eig, const Eigen::VectorXcd& psi0, double dt) {
    const Eigen::ArrayXcd phases = (-kI * dt * eig.evals.array().cast<complex<double>>()).exp();
    if (eig.real) {
        const Eigen::MatrixXd& v = eig.vecs_real;
        Eigen::VectorXcd c =
            (v.transpose() * psi0.real()).cast<complex<double>>() +
            kI * (v.transpose() * psi0.imag()).cast<complex<double>>();
        c.array() *= phases;
        return (v * c.real()).cast<complex<double>>() + kI * (v * c.imag()).cast<complex<double>>();
    }
    Eigen::VectorXcd c = eig.vecs_cplx.adjoint() * psi0;
    c.array() *= phases;
    return eig.vecs_cplx * c;
}

void propagate_grid(const hamiltonian::HamiltonianOperator& op, const DenseEig* cached,
                    const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                    const StepControl& ctrl, const GridSink& sink) {
    if (times.empty()) return;
    if (static_cast<std::uint64_t>(psi0.size()) != op.subspace().dimension())
        throw Error("propagator/bad_state", "state length does not match subspace dimension");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw Error("propagator/bad_grid", "output times must be strictly increasing");

    if (op.time_dependent() || ctrl.force_midpoint) {
        propagate_grid_midpoint(op, psi0, times, ctrl, sink);
        return;
    }
    if (cached) {
        propagate_grid_dense(*cached, psi0, times, sink);
        return;
    }
    if (op.subspace().dimension() <= ctrl.dense_cutoff) {
        const DenseEig eig = dense_eigendecomposition(op);
        propagate_grid_dense(eig, psi0, times, sink);
        return;
    }
    propagate_grid_static_lanczos(op, psi0, times, ctrl, sink);
}

Eigen::VectorXcd propagate(const hamiltonian::HamiltonianOperator& op,
                           const Eigen::VectorXcd& psi0, double t_from, double t_to,
                           const StepControl& ctrl) {
    if (t_to == t_from) return psi0;
    if (t_to < t_from)
        throw Error("propagator/bad_grid", "backward propagation not supported");
    Eigen::VectorXcd result;
    propagate_grid(op, nullptr, psi0, {t_from, t_to}, ctrl,
                   [&result](std::size_t i, const Eigen::VectorXcd& psi) {
                       if (i == 1) result = psi;
                   });
    return result;
}

}  // namespace ionsbm::propagator
