#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ionsbm::basis {

// Occupation numbers of the kept modes, in kept-list order.
using FockConfig = std::vector<int>;

enum class Spin : std::uint8_t { Ground = 0, Excited = 1 };

struct BasisState {
    Spin spin;
    FockConfig occupations;
};

// Per-mode truncation weights plus the resonance distance used to break ties.
struct ModeWeights {
    Eigen::VectorXd values;  // (lambda_k / (Delta_eff - w_k))^2, +inf on resonance
    Eigen::VectorXd gaps;    // min over tones of |Delta_eff - w_k|
};

// Result of top-K selection. `kept` holds original mode indices ordered by
// descending weight; ties resolve toward the smaller resonance gap, then the
// smaller original index, so selection is deterministic.
struct ModeSubset {
    std::vector<int> kept;
    std::vector<double> weights;
};

// Basis of the invariant subspace with total excitation M (spin excitation plus all
// phonon numbers) over K modes. States are ordered: all spin-ground states first
// (phonon sum M), then all spin-excited states (phonon sum M-1), each block sorted
// colexicographically by occupation. Ranks come from exact composition counting in
// O(K + M), no scanning.
class Subspace {
  public:
    Subspace(int mode_count, int total_excitation, std::uint64_t max_dimension = 5'000'000);

    int mode_count() const { return k_; }
    int total_excitation() const { return m_; }
    std::uint64_t dimension() const { return dim_; }
    // Number of spin-ground states; they occupy ranks [0, ground_count).
    std::uint64_t ground_count() const { return ground_; }

    std::uint64_t rank(Spin spin, const FockConfig& occupations) const;
    BasisState unrank(std::uint64_t r) const;

    // Materialized occupation table, dimension x K, row r = unrank(r).occupations.
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& occupation_table() const {
        return occ_;
    }

  private:
    int k_;
    int m_;
    std::uint64_t ground_;
    std::uint64_t dim_;
    // comp_[j] counts compositions into j parts by total: comp_[j][t] = C(t+j-1, j-1).
    std::vector<std::vector<std::uint64_t>> comp_;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> occ_;

    std::uint64_t composition_rank(const FockConfig& n, int total) const;
    void composition_unrank(std::uint64_t r, int total, FockConfig& out) const;
};

// Single-tone truncation weights w_k = (lambda_k / (Delta - w_k))^2. A resonant mode
// with non-zero coupling gets +inf (always kept); zero coupling gives zero weight
// even on resonance.
ModeWeights mode_weights(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& relative_freqs,
                         double spin_detuning);

// Multi-tone variant: each tone j is detuned to Delta + delta_j in the frame of the
// first tone, weights are computed per tone and the per-mode maximum is kept.
ModeWeights mode_weights_multitone(const std::vector<Eigen::VectorXd>& lambdas_per_tone,
                                   const Eigen::VectorXd& relative_freqs, double spin_detuning,
                                   const std::vector<double>& tone_offsets);

ModeSubset select_modes(const ModeWeights& weights, int keep_count);

}  // namespace ionsbm::basis
