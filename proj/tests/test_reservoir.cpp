#include <doctest.h>

#include <cmath>

#include "ionsbm/chain.hpp"
#include "ionsbm/reservoir.hpp"
#include "ionsbm/units.hpp"
#include "test_util.hpp"

using namespace ionsbm;

namespace {

Eigen::VectorXd single(double v) {
    Eigen::VectorXd out(1);
    out[0] = v;
    return out;
}

}  // namespace

TEST_CASE("one Lorentzian line has the stated peak, width, and area") {
    const double lambda = units::khz_to_rad_per_ms(1.3);
    const double w0 = units::khz_to_rad_per_ms(-17.0);
    const Eigen::VectorXd freqs = single(w0);
    const Eigen::VectorXd lambdas = single(-lambda);  // sign must not matter

    const double peak = reservoir::spectral_density_at(freqs, lambdas, w0);
    CHECK(peak == doctest::Approx(std::sqrt(2.0) * lambda).epsilon(1e-12));

    const double hwhm = lambda / std::sqrt(2.0);
    CHECK(reservoir::spectral_density_at(freqs, lambdas, w0 + hwhm) ==
          doctest::Approx(0.5 * peak).epsilon(1e-12));
    CHECK(reservoir::spectral_density_at(freqs, lambdas, w0 - hwhm) ==
          doctest::Approx(0.5 * peak).epsilon(1e-12));

    // Trapezoid quadrature over +-500 lambda against the delta-weight area.
    const double span = 500.0 * lambda;
    const int steps = 400000;
    const double h = 2.0 * span / steps;
    double integral = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double w = w0 - span + i * h;
        const double weight = (i == 0 || i == steps) ? 0.5 : 1.0;
        integral += weight * reservoir::spectral_density_at(freqs, lambdas, w);
    }
    integral *= h;
    CHECK(integral == doctest::Approx(units::pi * lambda * lambda).epsilon(5e-3));
}

TEST_CASE("lines add and zero couplings vanish from the curve") {
    Eigen::VectorXd freqs(3);
    freqs << 0.0, -50.0, -120.0;
    Eigen::VectorXd lambdas(3);
    lambdas << 4.0, 7.0, 0.0;

    for (double w : {-130.0, -120.0, -49.0, 3.0, 20.0}) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            sum += reservoir::spectral_density_at(single(freqs[k]), single(lambdas[k]), w);
        }
        CHECK(reservoir::spectral_density_at(freqs, lambdas, w) ==
              doctest::Approx(sum).epsilon(1e-14));
    }
    // The killed line contributes nothing even at its own center.
    CHECK(reservoir::spectral_density_at(single(-120.0), single(0.0), -120.0) == 0.0);
}

TEST_CASE("retuning the spin slides the reservoir rigidly") {
    Eigen::VectorXd freqs(2);
    freqs << 0.0, -80.0;
    reservoir::CouplingProfile profile;
    profile.lambdas.resize(2);
    profile.lambdas << 5.0, 3.0;
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(101, -150.0, 30.0);
    const reservoir::SpectralCurve base = reservoir::spectral_density(profile, freqs, grid);

    const double delta = -20.0;
    const double delta_prime = -50.0;
    const reservoir::SpectralCurve moved = reservoir::shift_spectrum(base, delta, delta_prime);
    for (int k = 0; k < 2; ++k) {
        CHECK(moved.line_freqs[k] == doctest::Approx(freqs[k] + delta - delta_prime));
    }
    for (int i = 0; i < grid.size(); ++i) {
        const double direct = reservoir::spectral_density_at(
            base.line_freqs, base.line_lambdas, grid[i] - (delta - delta_prime));
        CHECK(moved.values[i] == doctest::Approx(direct).epsilon(1e-13));
    }
}

TEST_CASE("combined spectrum reduces to a single tone and stacks shifted copies") {
    Eigen::VectorXd freqs(2);
    freqs << 0.0, -40.0;
    reservoir::CouplingProfile profile;
    profile.lambdas.resize(2);
    profile.lambdas << 2.0, 1.0;
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(81, -100.0, 20.0);

    const reservoir::CombinedSpectrum one =
        reservoir::combined_spectrum({profile}, {0.0}, freqs, grid);
    const reservoir::SpectralCurve direct = reservoir::spectral_density(profile, freqs, grid);
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(one.curve.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-14));
    }
    CHECK(one.validity_ratio == 0.0);
    CHECK_FALSE(one.overlap_warning);

    const double delta = 25.0;
    const reservoir::CombinedSpectrum two =
        reservoir::combined_spectrum({profile, profile}, {0.0, delta}, freqs, grid);
    for (int i = 0; i < grid.size(); ++i) {
        const double expect =
            reservoir::spectral_density_at(freqs, profile.lambdas, grid[i]) +
            reservoir::spectral_density_at(freqs, profile.lambdas, grid[i] + delta);
        CHECK(two.curve.values[i] == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(two.validity_ratio == doctest::Approx(2.0 / delta).epsilon(1e-14));
    CHECK_FALSE(two.overlap_warning);

    // Narrow separation trips the warning; coincident tones give an infinite ratio.
    const reservoir::CombinedSpectrum close =
        reservoir::combined_spectrum({profile, profile}, {0.0, 3.0}, freqs, grid);
    CHECK(close.overlap_warning);
    const reservoir::CombinedSpectrum merged =
        reservoir::combined_spectrum({profile, profile}, {0.0, 0.0}, freqs, grid);
    CHECK(std::isinf(merged.validity_ratio));
    CHECK(merged.overlap_warning);
}

TEST_CASE("coupling profiles carry mode sign and symmetry zeros") {
    chain::TrapConfig cfg;
    cfg.ion_count = 3;
    cfg.transverse_freq = units::mhz_to_rad_per_ms(1.1);
    cfg.axial_freq = units::khz_to_rad_per_ms(120.0);
    const chain::ModeSpectrum modes = chain::transverse_modes(chain::build_chain(cfg));
    const Eigen::VectorXd g = chain::lamb_dicke_scale(modes, units::khz_to_rad_per_ms(6.67));

    const reservoir::CouplingProfile edge = reservoir::coupling_profile(modes, g, 0);
    for (int k = 0; k < 3; ++k) {
        CHECK(edge.lambdas[k] == doctest::Approx(2.0 * g[k] * modes.mode_matrix(0, k)));
    }
    // The center ion is a node of the antisymmetric tilt mode.
    const reservoir::CouplingProfile center = reservoir::coupling_profile(modes, g, 1);
    CHECK(center.lambdas[1] == 0.0);
    CHECK(center.lambdas[0] != 0.0);

    CHECK(testutil::error_code_of([&] { reservoir::coupling_profile(modes, g, 3); }) ==
          "reservoir/bad_ion");
}

TEST_CASE("default omega grid spans the modes with ten sideband rates of padding") {
    Eigen::VectorXd freqs(3);
    freqs << 0.0, -30.0, -90.0;
    Eigen::VectorXd rates(3);
    rates << 2.0, 2.5, 3.0;
    const Eigen::VectorXd grid = reservoir::default_omega_grid(freqs, rates);
    CHECK(grid.size() == 2001);
    CHECK(grid[0] == doctest::Approx(-90.0 - 30.0));
    CHECK(grid[grid.size() - 1] == doctest::Approx(30.0));
    for (int i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] < grid[i + 1]);
}
