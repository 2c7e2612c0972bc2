#include "ionsbm/chain.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "ionsbm/errors.hpp"
#include "ionsbm/units.hpp"

namespace ionsbm::chain {

namespace {

// Gradient of the dimensionless potential energy.
Eigen::VectorXd potential_gradient(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::VectorXd g = u;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = u[i] - u[j];
            g[i] -= d / std::abs(d * d * d);
        }
    }
    return g;
}

double potential_energy(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    double e = 0.5 * u.squaredNorm();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e += 1.0 / std::abs(u[i] - u[j]);
    return e;
}

Eigen::MatrixXd potential_hessian(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
            diag += w;
            h(i, j) = -w;
        }
        h(i, i) = diag;
    }
    return h;
}

void mirror_symmetrize(Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    for (int i = 0; i < n / 2; ++i) {
        const double v = 0.5 * (u[i] - u[n - 1 - i]);
        u[i] = v;
        u[n - 1 - i] = -v;
    }
    if (n % 2 == 1) u[n / 2] = 0.0;
}

}  // namespace

double IonChain::mean_spacing_um() const {
    const int n = static_cast<int>(positions_um.size());
    if (n < 2) return 0.0;
    return (positions_um[n - 1] - positions_um[0]) / (n - 1);
}

Eigen::VectorXd solve_equilibrium(int ion_count) {
    if (ion_count < 1) throw Error("chain/bad_ion_count", "ion_count must be >= 1");
    if (ion_count == 1) return Eigen::VectorXd::Zero(1);

    const int n = ion_count;
    // Uniform seed with the empirical minimum-spacing estimate 2.018/N^0.559;
    // the damped Newton iteration below tolerates the crude outer-ion placement.
    const double s0 = 2.018 / std::pow(n, 0.559);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = (i - 0.5 * (n - 1)) * s0;

    constexpr double tol = 1e-12;
    constexpr int max_iter = 200;
    auto ordered = [n](const Eigen::VectorXd& v) {
        for (int i = 0; i + 1 < n; ++i)
            if (v[i] >= v[i + 1]) return false;
        return true;
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd g = potential_gradient(u);
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm < tol) break;
        const Eigen::MatrixXd h = potential_hessian(u);
        const Eigen::VectorXd step = h.ldlt().solve(-g);

        bool moved = false;
        // Near the minimum the true energy decrease (~ g^2) sinks below the
        // rounding noise of the energy evaluation and backtracking on the energy
        // would reject every step; plain Newton judged by the gradient is safe
        // there and converges quadratically.
        if (gnorm < 1e-6) {
            const Eigen::VectorXd trial = u + step;
            if (ordered(trial) && potential_gradient(trial).lpNorm<Eigen::Infinity>() < gnorm) {
                u = trial;
                moved = true;
            }
        }
        if (!moved) {
            // Backtracking on the energy; also reject steps that reorder ions.
            const double e0 = potential_energy(u);
            double alpha = 1.0;
            for (int k = 0; k < 40; ++k, alpha *= 0.5) {
                const Eigen::VectorXd trial = u + alpha * step;
                if (!ordered(trial)) continue;
                if (potential_energy(trial) < e0) {
                    u = trial;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) break;  // no acceptable step left; the residual check decides
    }

    mirror_symmetrize(u);
    const double residual = potential_gradient(u).lpNorm<Eigen::Infinity>();
    if (residual >= 1e-10) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", residual);
        throw Error("chain/no_convergence", "equilibrium solve stalled at gradient norm " +
                                                std::string(buf) + " for N=" +
                                                std::to_string(ion_count));
    }
    return u;
}

double fit_axial_frequency(int ion_count, double target_mean_spacing_um,
                           double ion_mass_amu, int charge) {
    if (ion_count < 2)
        throw Error("chain/bad_fit", "spacing fit needs at least two ions");
    if (target_mean_spacing_um <= 0.0)
        throw Error("chain/bad_fit", "target mean spacing must be positive");

    const Eigen::VectorXd u = solve_equilibrium(ion_count);
    const double extent = (u[ion_count - 1] - u[0]) / (ion_count - 1);
    auto spacing = [&](double wz) {
        return units::length_scale_um(ion_mass_amu, charge, wz) * extent;
    };

    // Spacing scales as wz^(-2/3): bracket the target, then bisect.
    double lo = 1e-4, hi = 1e4;
    for (int k = 0; k < 200 && spacing(lo) < target_mean_spacing_um; ++k) lo *= 0.5;
    for (int k = 0; k < 200 && spacing(hi) > target_mean_spacing_um; ++k) hi *= 2.0;
    if (spacing(lo) < target_mean_spacing_um || spacing(hi) > target_mean_spacing_um)
        throw Error("chain/bad_fit", "could not bracket target spacing");

    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (spacing(mid) > target_mean_spacing_um)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) / hi < 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

IonChain build_chain(const TrapConfig& config) {
    if (config.ion_count < 1) throw Error("chain/bad_ion_count", "ion_count must be >= 1");
    if (config.transverse_freq <= 0.0)
        throw Error("chain/bad_config", "transverse_freq must be positive");
    if (config.axial_freq.has_value() == config.target_mean_spacing.has_value())
        throw Error("chain/bad_config",
                    "exactly one of axial_freq and target_mean_spacing must be given");

    IonChain chain;
    chain.config = config;
    chain.equilibrium = solve_equilibrium(config.ion_count);
    if (config.axial_freq) {
        chain.axial_freq = *config.axial_freq;
        if (chain.axial_freq <= 0.0)
            throw Error("chain/bad_config", "axial_freq must be positive");
    } else {
        chain.axial_freq = fit_axial_frequency(config.ion_count, *config.target_mean_spacing,
                                               config.ion_mass_amu, config.charge);
    }
    chain.length_scale =
        units::length_scale_um(config.ion_mass_amu, config.charge, chain.axial_freq);
    chain.positions_um = chain.length_scale * chain.equilibrium;

    // The fitted trap must actually hold a linear chain.
    transverse_modes(chain);
    return chain;
}

ModeSpectrum transverse_modes(const IonChain& chain) {
    const int n = static_cast<int>(chain.equilibrium.size());
    const double wx = chain.config.transverse_freq;
    const double wz = chain.axial_freq;
    if (wx <= 0.0 || wz <= 0.0)
        throw Error("chain/bad_config", "frequencies must be positive");

    const Eigen::VectorXd& u = chain.equilibrium;
    const double aspect2 = (wx / wz) * (wx / wz);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = aspect2;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = 1.0 / std::pow(std::abs(u[i] - u[j]), 3);
            diag -= w;
            a(i, j) = w;
        }
        a(i, i) = diag;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw Error("chain/eigensolver", "transverse Hessian diagonalization failed");

    // Ascending from Eigen; flip to descending so index 0 is the COM mode.
    Eigen::VectorXd mu = solver.eigenvalues().reverse();
    Eigen::MatrixXd b = solver.eigenvectors().rowwise().reverse();

    for (int k = 0; k < n; ++k) {
        if (mu[k] <= 0.0)
            throw Error("chain/unstable",
                        "transverse mode " + std::to_string(k) +
                            " has non-positive eigenvalue " + std::to_string(mu[k]) +
                            "; the chain buckles at this aspect ratio");
    }

    // The Hessian commutes with the mirror flip, so non-degenerate eigenvectors have
    // definite parity; snapping them to it makes antisymmetric-mode entries on a
    // center ion exactly zero instead of merely tiny.
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd v = b.col(k);
        Eigen::VectorXd pv = v.reverse();
        const double parity = v.dot(pv) >= 0.0 ? 1.0 : -1.0;
        v = 0.5 * (v + parity * pv);
        v.normalize();

        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        if (v[imax] < 0.0) v = -v;
        b.col(k) = v;
    }
    // COM mode: uniform participation, fixed fully positive.
    if (b(0, 0) < 0.0) b.col(0) = -b.col(0);

    ModeSpectrum spectrum;
    spectrum.absolute_freqs = (wz * mu.array().sqrt()).matrix();
    spectrum.mode_matrix = b;
    spectrum.relative_freqs =
        spectrum.absolute_freqs.array() - spectrum.absolute_freqs[0];
    spectrum.relative_freqs[0] = 0.0;
    return spectrum;
}

Eigen::VectorXd lamb_dicke_scale(const ModeSpectrum& spectrum, double g_com) {
    if (g_com < 0.0) throw Error("chain/bad_config", "COM sideband rate must be >= 0");
    const double w_com = spectrum.absolute_freqs[0];
    return (g_com * (w_com / spectrum.absolute_freqs.array()).sqrt()).matrix();
}

}  // namespace ionsbm::chain
