#include "ionsbm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "ionsbm/errors.hpp"

namespace ionsbm::observables {

namespace {

const char* axis_name(Axis axis) {
    switch (axis) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

}  // namespace

double p0(const Eigen::Matrix2cd& rho) {
    return std::clamp(rho(0, 0).real(), 0.0, 1.0);
}

Eigen::Vector3d bloch(const Eigen::Matrix2cd& rho) {
    const std::complex<double> r01 = rho(0, 1);
    return {2.0 * r01.real(), -2.0 * r01.imag(), rho(0, 0).real() - rho(1, 1).real()};
}

Tomography tomography_reconstruct(double sx, double sy, double sz) {
    Eigen::Vector3d s(sx, sy, sz);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(s[i]) > 1.0 + 1e-9) {
            throw Error("observables/bad_bloch",
                        "Bloch component " + std::string(axis_name(static_cast<Axis>(i))) +
                            " = " + std::to_string(s[i]) + " is outside [-1, 1]");
        }
    }
    Tomography out;
    const double norm = s.norm();
    if (norm > 1.0) {
        s /= norm;
        out.projected = true;
    }
    const std::complex<double> i1(0.0, 1.0);
    out.rho(0, 0) = 0.5 * (1.0 + s[2]);
    out.rho(1, 1) = 0.5 * (1.0 - s[2]);
    out.rho(0, 1) = 0.5 * (s[0] - i1 * s[1]);
    out.rho(1, 0) = std::conj(out.rho(0, 1));
    return out;
}

double simulate_measurement(const Eigen::Matrix2cd& rho, Axis axis, int shots, Rng& rng) {
    if (shots <= 0) throw Error("observables/bad_shots", "shot count must be positive");
    double expect = 0.0;
    switch (axis) {
        case Axis::X: expect = 2.0 * rho(0, 1).real(); break;
        case Axis::Y: expect = -2.0 * rho(0, 1).imag(); break;
        case Axis::Z: expect = rho(0, 0).real() - rho(1, 1).real(); break;
    }
    const double p_up = std::clamp(0.5 * (1.0 + expect), 0.0, 1.0);
    long long ups = 0;
    for (int k = 0; k < shots; ++k) {
        if (rng.uniform53() <= p_up) ++ups;
    }
    return 2.0 * static_cast<double>(ups) / static_cast<double>(shots) - 1.0;
}

double trace_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    const Eigen::Matrix2cd d = a - b;
    const double h = 0.5 * (d(0, 0).real() + d(1, 1).real());
    const double r = std::hypot(0.5 * (d(0, 0).real() - d(1, 1).real()), std::abs(d(0, 1)));
    const double via_eigs = 0.5 * (std::abs(h + r) + std::abs(h - r));
    const double via_bloch = 0.5 * (bloch(a) - bloch(b)).norm();
    // The Bloch route cannot see a trace mismatch, so allow for it explicitly.
    const double slack = 1e-10 + std::abs(h);
    if (std::abs(via_eigs - via_bloch) > slack) {
        throw Error("observables/distance_mismatch",
                    "trace-distance cross-check failed: " + std::to_string(via_eigs) + " vs " +
                        std::to_string(via_bloch));
    }
    return via_eigs;
}

RevivalReport revival_detect(const std::vector<double>& times, const std::vector<double>& signal,
                             double collapse_threshold, double basin_threshold) {
    if (times.size() != signal.size()) {
        throw Error("observables/bad_signal", "times and signal lengths differ");
    }
    RevivalReport report;
    const std::size_t n = signal.size();
    std::size_t ic = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (signal[i] < collapse_threshold) {
            ic = i;
            break;
        }
    }
    if (ic == n) return report;
    report.collapse_time = times[ic];
    std::size_t basin_exit = n;
    for (std::size_t i = ic; i < n; ++i) {
        if (signal[i] >= basin_threshold) {
            basin_exit = i;
            break;
        }
    }
    report.basin_start = times[ic];
    report.basin_end = basin_exit == n ? times[n - 1] : times[basin_exit];
    std::size_t imax = ic;
    for (std::size_t i = ic + 1; i < n; ++i) {
        if (signal[i] > signal[imax]) imax = i;
    }
    if (signal[imax] > basin_threshold) {
        report.revival_time = times[imax];
        report.revival_height = signal[imax];
    }
    return report;
}

}  // namespace ionsbm::observables
