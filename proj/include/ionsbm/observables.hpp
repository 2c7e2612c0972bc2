#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ionsbm/rng.hpp"

namespace ionsbm::observables {

// Spin density matrices are 2x2 in the basis (|0>, |1>); the Pauli-z convention puts
// <sigma_z> = +1 on |0>, so P0 = (1 + <sigma_z>)/2 = rho_00.

enum class Axis : int { X = 0, Y = 1, Z = 2 };

// Population of |0>, clipped into [0, 1] against roundoff.
double p0(const Eigen::Matrix2cd& rho);

// Bloch components (<sigma_x>, <sigma_y>, <sigma_z>).
Eigen::Vector3d bloch(const Eigen::Matrix2cd& rho);

struct Tomography {
    Eigen::Matrix2cd rho;
    bool projected = false;  // Bloch vector exceeded unit length and was rescaled
};

// rho = (I + s . sigma)/2 from measured expectations. Components beyond 1 + 1e-9 in
// magnitude are rejected; a vector outside the Bloch ball (statistics of finite
// shots) is radially projected back onto it and flagged.
Tomography tomography_reconstruct(double sx, double sy, double sz);

// Expectation of sigma_axis estimated from `shots` projective measurements.
double simulate_measurement(const Eigen::Matrix2cd& rho, Axis axis, int shots, Rng& rng);

// Half the trace norm of a - b, computed from the 2x2 eigenvalues and cross-checked
// against half the Euclidean distance of the Bloch vectors.
double trace_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);

struct RevivalReport {
    std::optional<double> collapse_time;   // first crossing below the collapse threshold
    std::optional<double> basin_start;     // interval where the signal stays below
    std::optional<double> basin_end;       //   the basin threshold after collapsing
    std::optional<double> revival_time;    // first global argmax after the collapse
    std::optional<double> revival_height;
};

// Collapse/revival structure of a sampled signal. A revival is reported only when
// some post-collapse value exceeds the basin threshold; the revival time is the
// first global argmax after the collapse.
RevivalReport revival_detect(const std::vector<double>& times, const std::vector<double>& signal,
                             double collapse_threshold = 0.15, double basin_threshold = 0.15);

}  // namespace ionsbm::observables
