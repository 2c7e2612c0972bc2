#include "ionsbm/basis.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "ionsbm/errors.hpp"

namespace ionsbm::basis {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return (a > kSaturated - b) ? kSaturated : a + b;
}

}  // namespace

Subspace::Subspace(int mode_count, int total_excitation, std::uint64_t max_dimension)
    : k_(mode_count), m_(total_excitation) {
    if (k_ < 1) throw Error("basis/bad_modes", "at least one mode required");
    if (m_ < 0) throw Error("basis/bad_excitation", "total excitation must be >= 0");
    if (m_ > 255) throw Error("basis/bad_excitation", "total excitation above 255 unsupported");

    // comp_[j][t] = number of ways to put t quanta into j modes, built as running
    // prefix sums of Pascal's triangle; exact until it saturates, and saturation is
    // only reachable far beyond any dimension the memory cap admits.
    comp_.assign(k_ + 1, std::vector<std::uint64_t>(m_ + 1, 0));
    comp_[0][0] = 1;
    for (int j = 1; j <= k_; ++j) {
        std::uint64_t acc = 0;
        for (int t = 0; t <= m_; ++t) {
            acc = saturating_add(acc, comp_[j - 1][t]);
            comp_[j][t] = acc;
        }
    }

    ground_ = comp_[k_][m_];
    const std::uint64_t excited = m_ >= 1 ? comp_[k_][m_ - 1] : 0;
    dim_ = saturating_add(ground_, excited);
    if (dim_ > max_dimension)
        throw Error("basis/dimension_cap",
                    "subspace dimension " + std::to_string(dim_) + " exceeds cap " +
                        std::to_string(max_dimension) + " (K=" + std::to_string(k_) +
                        ", M=" + std::to_string(m_) + ")");

    occ_.resize(dim_, k_);
    FockConfig n(k_);
    for (std::uint64_t r = 0; r < dim_; ++r) {
        const int total = r < ground_ ? m_ : m_ - 1;
        composition_unrank(r < ground_ ? r : r - ground_, total, n);
        for (int j = 0; j < k_; ++j) occ_(r, j) = static_cast<std::uint8_t>(n[j]);
    }
}

std::uint64_t Subspace::composition_rank(const FockConfig& n, int total) const {
    // Colex: the last coordinate is most significant. All configs with a smaller
    // value there come first, counted per block of the remaining modes.
    std::uint64_t r = 0;
    int rem = total;
    for (int pos = k_ - 1; pos >= 1; --pos) {
        for (int c = 0; c < n[pos]; ++c) r += comp_[pos][rem - c];
        rem -= n[pos];
    }
    return r;
}

void Subspace::composition_unrank(std::uint64_t r, int total, FockConfig& out) const {
    int rem = total;
    for (int pos = k_ - 1; pos >= 1; --pos) {
        int c = 0;
        while (true) {
            const std::uint64_t block = comp_[pos][rem - c];
            if (r < block) break;
            r -= block;
            ++c;
        }
        out[pos] = c;
        rem -= c;
    }
    out[0] = rem;
}

std::uint64_t Subspace::rank(Spin spin, const FockConfig& occupations) const {
    if (static_cast<int>(occupations.size()) != k_)
        throw Error("basis/bad_state", "occupation list length mismatch");
    int total = 0;
    for (int v : occupations) {
        if (v < 0) throw Error("basis/bad_state", "negative occupation");
        total += v;
    }
    const int expected = spin == Spin::Ground ? m_ : m_ - 1;
    if (total != expected)
        throw Error("basis/bad_state",
                    "state has phonon sum " + std::to_string(total) + ", subspace M=" +
                        std::to_string(m_) + " requires " + std::to_string(expected) +
                        (spin == Spin::Ground ? " for spin ground" : " for spin excited"));
    const std::uint64_t r = composition_rank(occupations, total);
    return spin == Spin::Ground ? r : ground_ + r;
}

BasisState Subspace::unrank(std::uint64_t r) const {
    if (r >= dim_) throw Error("basis/bad_state", "rank out of range");
    BasisState state;
    state.spin = r < ground_ ? Spin::Ground : Spin::Excited;
    state.occupations.resize(k_);
    for (int j = 0; j < k_; ++j) state.occupations[j] = occ_(r, j);
    return state;
}

ModeWeights mode_weights(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& relative_freqs,
                         double spin_detuning) {
    return mode_weights_multitone({lambdas}, relative_freqs, spin_detuning, {0.0});
}

ModeWeights mode_weights_multitone(const std::vector<Eigen::VectorXd>& lambdas_per_tone,
                                   const Eigen::VectorXd& relative_freqs, double spin_detuning,
                                   const std::vector<double>& tone_offsets) {
    if (lambdas_per_tone.empty() || lambdas_per_tone.size() != tone_offsets.size())
        throw Error("basis/bad_weights", "one coupling vector per tone required");
    const int n = static_cast<int>(relative_freqs.size());

    ModeWeights w;
    w.values = Eigen::VectorXd::Zero(n);
    w.gaps = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < lambdas_per_tone.size(); ++j) {
        const Eigen::VectorXd& lam = lambdas_per_tone[j];
        if (lam.size() != n)
            throw Error("basis/bad_weights", "coupling vector length mismatch in tone " +
                                                 std::to_string(j));
        const double delta_eff = spin_detuning + tone_offsets[j];
        for (int k = 0; k < n; ++k) {
            const double gap = std::abs(delta_eff - relative_freqs[k]);
            w.gaps[k] = std::min(w.gaps[k], gap);
            if (lam[k] == 0.0) continue;  // uncoupled modes never matter, resonant or not
            const double wk = gap == 0.0 ? std::numeric_limits<double>::infinity()
                                         : std::pow(lam[k] / (delta_eff - relative_freqs[k]), 2);
            w.values[k] = std::max(w.values[k], wk);
        }
    }
    return w;
}

ModeSubset select_modes(const ModeWeights& weights, int keep_count) {
    const int n = static_cast<int>(weights.values.size());
    if (keep_count < 1 || keep_count > n)
        throw Error("basis/bad_selection",
                    "keep_count " + std::to_string(keep_count) + " outside [1, " +
                        std::to_string(n) + "]");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (weights.values[a] != weights.values[b]) return weights.values[a] > weights.values[b];
        if (weights.gaps[a] != weights.gaps[b]) return weights.gaps[a] < weights.gaps[b];
        return a < b;
    });

    ModeSubset subset;
    subset.kept.assign(order.begin(), order.begin() + keep_count);
    subset.weights.reserve(keep_count);
    for (int idx : subset.kept) subset.weights.push_back(weights.values[idx]);
    return subset;
}

}  // namespace ionsbm::basis
