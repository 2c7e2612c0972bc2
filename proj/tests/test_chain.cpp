#include <doctest.h>

#include <cmath>

#include "ionsbm/chain.hpp"
#include "ionsbm/units.hpp"
#include "test_util.hpp"

using namespace ionsbm;

namespace {

// Independent gradient of the dimensionless potential, for convergence checks.
Eigen::VectorXd potential_gradient_oracle(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::VectorXd g = u;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = u[i] - u[j];
            g[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
        }
    }
    return g;
}

chain::IonChain chain_with_axial(int n, double wx, double wz) {
    chain::TrapConfig cfg;
    cfg.ion_count = n;
    cfg.transverse_freq = wx;
    cfg.axial_freq = wz;
    return chain::build_chain(cfg);
}

}  // namespace

TEST_CASE("two and three ion equilibria match the closed forms") {
    const double u2 = std::pow(0.25, 1.0 / 3.0);
    const Eigen::VectorXd got2 = chain::solve_equilibrium(2);
    CHECK(got2[0] == doctest::Approx(-u2).epsilon(1e-9));
    CHECK(got2[1] == doctest::Approx(u2).epsilon(1e-9));

    const double u3 = std::pow(1.25, 1.0 / 3.0);
    const Eigen::VectorXd got3 = chain::solve_equilibrium(3);
    CHECK(got3[0] == doctest::Approx(-u3).epsilon(1e-9));
    CHECK(got3[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(got3[2] == doctest::Approx(u3).epsilon(1e-9));
}

TEST_CASE("equilibrium gradients vanish and positions mirror for larger chains") {
    // Every size up to 25: the Newton acceptance logic once stalled only for
    // particular N, so spot checks are not enough here.
    for (int n = 2; n <= 25; ++n) {
        CAPTURE(n);
        const Eigen::VectorXd u = chain::solve_equilibrium(n);
        CHECK(potential_gradient_oracle(u).lpNorm<Eigen::Infinity>() < 1e-10);
        for (int i = 0; i < n; ++i) {
            CHECK(u[i] == -u[n - 1 - i]);
            if (i + 1 < n) CHECK(u[i] < u[i + 1]);
        }
        if (n % 2 == 1) CHECK(u[n / 2] == 0.0);
    }
}

TEST_CASE("length scale reproduces the defining constants") {
    const double wz = units::khz_to_rad_per_ms(150.0);
    const double wz_si = wz * 1e3;  // rad/s
    const double q = 1.602176634e-19;
    const double ke = 8.9875517923e9;
    const double m = 171.0 * 1.66053906660e-27;
    const double expect_um = std::cbrt(ke * q * q / (m * wz_si * wz_si)) * 1e6;
    CHECK(units::length_scale_um(171.0, 1, wz) == doctest::Approx(expect_um).epsilon(1e-12));
}

TEST_CASE("target spacing is fitted to machine precision and round trips") {
    chain::TrapConfig cfg;
    cfg.ion_count = 20;
    cfg.transverse_freq = units::mhz_to_rad_per_ms(2.397);
    cfg.target_mean_spacing = 4.6;
    const chain::IonChain ions = chain::build_chain(cfg);
    CHECK(ions.mean_spacing_um() == doctest::Approx(4.6).epsilon(1e-12));
    CHECK(ions.axial_freq > 0.0);
    CHECK(ions.axial_freq < cfg.transverse_freq);

    // Feeding the fitted axial frequency back must land on the same spacing.
    const chain::IonChain again = chain_with_axial(20, cfg.transverse_freq, ions.axial_freq);
    CHECK(again.mean_spacing_um() == doctest::Approx(4.6).epsilon(1e-12));
    CHECK(ions.positions_um[19] - ions.positions_um[0] ==
          doctest::Approx(19 * 4.6).epsilon(1e-12));  // mean spacing is span / (N-1)
}

TEST_CASE("two ion transverse modes match the analytic pair") {
    const double wz = units::khz_to_rad_per_ms(100.0);
    const double wx = units::khz_to_rad_per_ms(900.0);
    const chain::ModeSpectrum modes = chain::transverse_modes(chain_with_axial(2, wx, wz));
    CHECK(modes.absolute_freqs[0] == doctest::Approx(wx).epsilon(1e-12));
    CHECK(modes.absolute_freqs[1] ==
          doctest::Approx(std::sqrt(wx * wx - wz * wz)).epsilon(1e-12));
    CHECK(modes.relative_freqs[0] == 0.0);
    CHECK(modes.relative_freqs[1] < 0.0);
    // COM column is the uniform vector.
    CHECK(modes.mode_matrix(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(modes.mode_matrix(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("three ion transverse modes match the analytic triple") {
    const double wz = units::khz_to_rad_per_ms(120.0);
    const double wx = units::khz_to_rad_per_ms(1100.0);
    const chain::ModeSpectrum modes = chain::transverse_modes(chain_with_axial(3, wx, wz));
    // Transverse eigenvalues are a^2, a^2 - 1, a^2 - 12/5 in units of wz^2, the
    // axial spectrum 1, 3, 29/5 mapped through mu_tr = a^2 - (mu_ax - 1)/2.
    const double a2 = (wx / wz) * (wx / wz);
    CHECK(modes.absolute_freqs[0] == doctest::Approx(wz * std::sqrt(a2)).epsilon(1e-12));
    CHECK(modes.absolute_freqs[1] == doctest::Approx(wz * std::sqrt(a2 - 1.0)).epsilon(1e-12));
    CHECK(modes.absolute_freqs[2] == doctest::Approx(wz * std::sqrt(a2 - 2.4)).epsilon(1e-12));
    // Center ion sits still in the antisymmetric (tilt) mode, exactly.
    CHECK(modes.mode_matrix(1, 1) == 0.0);
}

TEST_CASE("mode matrices are orthonormal and ordered for a long chain") {
    const chain::ModeSpectrum modes =
        chain::transverse_modes(chain_with_axial(20, units::mhz_to_rad_per_ms(2.397),
                                                 units::khz_to_rad_per_ms(140.0)));
    const Eigen::MatrixXd gram =
        modes.mode_matrix.transpose() * modes.mode_matrix - Eigen::MatrixXd::Identity(20, 20);
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k + 1 < 20; ++k) {
        CHECK(modes.absolute_freqs[k] > modes.absolute_freqs[k + 1]);
    }
    for (int i = 0; i < 20; ++i) CHECK(modes.mode_matrix(i, 0) > 0.0);
}

TEST_CASE("odd chains zero the center ion in every antisymmetric mode") {
    const int n = 7;
    const chain::ModeSpectrum modes = chain::transverse_modes(
        chain_with_axial(n, units::mhz_to_rad_per_ms(2.0), units::khz_to_rad_per_ms(150.0)));
    int antisymmetric = 0;
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd v = modes.mode_matrix.col(k);
        bool odd_parity = true;
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i] + v[n - 1 - i]) > 1e-9) odd_parity = false;
        }
        if (odd_parity) {
            ++antisymmetric;
            CHECK(v[n / 2] == 0.0);
        }
    }
    CHECK(antisymmetric == n / 2);
}

TEST_CASE("sideband rates follow the inverse square root frequency rule") {
    const chain::ModeSpectrum modes = chain::transverse_modes(
        chain_with_axial(5, units::mhz_to_rad_per_ms(2.397), units::khz_to_rad_per_ms(200.0)));
    const double g_com = units::khz_to_rad_per_ms(6.67);
    const Eigen::VectorXd g = chain::lamb_dicke_scale(modes, g_com);
    CHECK(g[0] == doctest::Approx(g_com).epsilon(1e-15));
    for (int k = 1; k < 5; ++k) {
        CHECK(g[k] ==
              doctest::Approx(g_com * std::sqrt(modes.absolute_freqs[0] /
                                                modes.absolute_freqs[k])).epsilon(1e-12));
        CHECK(g[k] > g_com);  // lower frequency modes couple harder
    }
}

TEST_CASE("soft transverse confinement is rejected as unstable") {
    CHECK(testutil::error_code_of([] {
        chain::transverse_modes(chain_with_axial(5, units::khz_to_rad_per_ms(150.0),
                                                 units::khz_to_rad_per_ms(150.0)));
    }) == "chain/unstable");
}

TEST_CASE("trap configuration validation") {
    chain::TrapConfig cfg;
    cfg.ion_count = 4;
    cfg.transverse_freq = units::mhz_to_rad_per_ms(2.0);
    CHECK(testutil::error_code_of([&] { chain::build_chain(cfg); }) == "chain/bad_config");
    cfg.axial_freq = units::khz_to_rad_per_ms(100.0);
    cfg.target_mean_spacing = 4.6;
    CHECK(testutil::error_code_of([&] { chain::build_chain(cfg); }) == "chain/bad_config");
    cfg.target_mean_spacing.reset();
    cfg.ion_count = 0;
    CHECK(testutil::error_code_of([&] { chain::build_chain(cfg); }) == "chain/bad_ion_count");
}
