#include "ionsbm/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "ionsbm/errors.hpp"

namespace ionsbm::hamiltonian {

using basis::Spin;
using std::complex;

HamiltonianOperator::HamiltonianOperator(std::shared_ptr<const basis::Subspace> subspace,
                                         Eigen::VectorXd kept_freqs, double spin_detuning,
                                         std::vector<ToneCoupling> tones)
    : subspace_(std::move(subspace)),
      kept_freqs_(std::move(kept_freqs)),
      spin_detuning_(spin_detuning),
      tones_(std::move(tones)) {
    const int k = subspace_->mode_count();
    if (kept_freqs_.size() != k)
        throw Error("hamiltonian/bad_build", "one frequency per kept mode required");
    if (tones_.empty()) throw Error("hamiltonian/bad_build", "at least one tone required");
    if (tones_[0].offset != 0.0)
        throw Error("hamiltonian/bad_build",
                    "first tone defines the rotating frame and must have offset 0");
    for (std::size_t j = 0; j < tones_.size(); ++j) {
        if (tones_[j].lambdas.size() != k)
            throw Error("hamiltonian/bad_build",
                        "tone " + std::to_string(j) + " coupling length mismatch");
        if (tones_[j].offset != 0.0) time_dependent_ = true;
    }

    rebuild_diagonal();

    // Coupling pattern: every spin-ground state with n_k > 0 pairs with the excited
    // state holding one quantum less in mode k. Both blocks enumerate compositions of
    // equal totals in the same order apart from the removed quantum, so ranks come
    // from the subspace's combinatorics.
    const auto& occ = subspace_->occupation_table();
    const std::uint64_t ground = subspace_->ground_count();
    blocks_.resize(k);
    basis::FockConfig n(k);
    for (int mode = 0; mode < k; ++mode) {
        blocks_[mode].mode = mode;
        blocks_[mode].gap = spin_detuning_ - kept_freqs_[mode];
    }
    std::vector<std::vector<double>> amps(k);
    for (std::uint64_t c = 0; c < ground; ++c) {
        for (int j = 0; j < k; ++j) n[j] = occ(c, j);
        for (int mode = 0; mode < k; ++mode) {
            if (n[mode] == 0) continue;
            n[mode] -= 1;
            const std::uint64_t r = subspace_->rank(Spin::Excited, n);
            n[mode] += 1;
            blocks_[mode].rows.push_back(static_cast<std::uint32_t>(r));
            blocks_[mode].cols.push_back(static_cast<std::uint32_t>(c));
            amps[mode].push_back(std::sqrt(static_cast<double>(n[mode])));
        }
    }
    for (int mode = 0; mode < k; ++mode)
        blocks_[mode].amps =
            Eigen::Map<Eigen::VectorXd>(amps[mode].data(), static_cast<long>(amps[mode].size()));

    compute_coupling_bound();
}

void HamiltonianOperator::rebuild_diagonal() {
    const auto& occ = subspace_->occupation_table();
    const std::uint64_t dim = subspace_->dimension();
    const std::uint64_t ground = subspace_->ground_count();
    const int k = subspace_->mode_count();
    diag_.resize(dim);
    for (std::uint64_t r = 0; r < dim; ++r) {
        double e = r < ground ? -0.5 * spin_detuning_ : 0.5 * spin_detuning_;
        for (int j = 0; j < k; ++j) e += kept_freqs_[j] * occ(r, j);
        diag_[r] = e;
    }
}

void HamiltonianOperator::compute_coupling_bound() {
    // Gershgorin on the Hermitian coupling part with every tone phase aligned:
    // radius_i = sum of |entries| in row i, using sum_j |lambda_jk|/2 per mode.
    Eigen::VectorXd radius = Eigen::VectorXd::Zero(subspace_->dimension());
    for (const auto& block : blocks_) {
        double lsum = 0.0;
        for (const auto& tone : tones_) lsum += 0.5 * std::abs(tone.lambdas[block.mode]);
        for (std::size_t e = 0; e < block.rows.size(); ++e) {
            const double a = lsum * block.amps[e];
            radius[block.rows[e]] += a;
            radius[block.cols[e]] += a;
        }
    }
    coupling_bound_ = radius.size() > 0 ? radius.maxCoeff() : 0.0;
}

complex<double> HamiltonianOperator::tone_coefficient(int mode_pos, double t) const {
    complex<double> c{0.0, 0.0};
    for (const auto& tone : tones_) {
        const double lam = tone.lambdas[mode_pos];
        if (lam == 0.0) continue;
        c += 0.5 * lam * std::polar(1.0, tone.offset * t + tone.phase);
    }
    return c;
}

void HamiltonianOperator::apply(double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const {
    out = diag_.array() * v.array();
    for (const auto& block : blocks_) {
        const complex<double> c = tone_coefficient(block.mode, t);
        if (c == complex<double>{0.0, 0.0}) continue;
        const complex<double> cc = std::conj(c);
        for (std::size_t e = 0; e < block.rows.size(); ++e) {
            const auto r = block.rows[e];
            const auto col = block.cols[e];
            const double a = block.amps[e];
            out[r] += c * a * v[col];
            out[col] += cc * a * v[r];
        }
    }
}

void HamiltonianOperator::apply_interaction(double t, const Eigen::VectorXcd& v,
                                            Eigen::VectorXcd& out) const {
    out.setZero(v.size());
    for (const auto& block : blocks_) {
        // Diagonal gap folds into the tone phase: every entry of this block connects
        // states whose diagonal differs by the same gap.
        complex<double> c{0.0, 0.0};
        for (const auto& tone : tones_) {
            const double lam = tone.lambdas[block.mode];
            if (lam == 0.0) continue;
            c += 0.5 * lam * std::polar(1.0, (tone.offset + block.gap) * t + tone.phase);
        }
        if (c == complex<double>{0.0, 0.0}) continue;
        const complex<double> cc = std::conj(c);
        for (std::size_t e = 0; e < block.rows.size(); ++e) {
            const auto r = block.rows[e];
            const auto col = block.cols[e];
            const double a = block.amps[e];
            out[r] += c * a * v[col];
            out[col] += cc * a * v[r];
        }
    }
}

Eigen::MatrixXcd HamiltonianOperator::dense(double t) const {
    const auto dim = static_cast<long>(subspace_->dimension());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (long i = 0; i < dim; ++i) h(i, i) = diag_[i];
    for (const auto& block : blocks_) {
        const complex<double> c = tone_coefficient(block.mode, t);
        for (std::size_t e = 0; e < block.rows.size(); ++e) {
            h(block.rows[e], block.cols[e]) += c * block.amps[e];
            h(block.cols[e], block.rows[e]) += std::conj(c) * block.amps[e];
        }
    }
    return h;
}

HamiltonianOperator HamiltonianOperator::frame_shift(double new_detuning) const {
    HamiltonianOperator shifted(*this);
    shifted.spin_detuning_ = new_detuning;
    shifted.rebuild_diagonal();
    for (auto& block : shifted.blocks_) block.gap = new_detuning - shifted.kept_freqs_[block.mode];
    return shifted;
}

double HamiltonianOperator::max_phase_rate() const {
    double rate = 0.0;
    for (const auto& block : blocks_) {
        for (const auto& tone : tones_) {
            if (tone.lambdas[block.mode] == 0.0) continue;
            rate = std::max(rate, std::abs(block.gap + tone.offset));
        }
    }
    for (const auto& tone : tones_) rate = std::max(rate, std::abs(tone.offset));
    return rate;
}

}  // namespace ionsbm::hamiltonian
