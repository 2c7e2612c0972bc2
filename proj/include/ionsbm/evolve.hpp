#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "ionsbm/basis.hpp"
#include "ionsbm/hamiltonian.hpp"
#include "ionsbm/propagator.hpp"
#include "ionsbm/rng.hpp"

namespace ionsbm::evolve {

enum class InitialSpin : int { Zero = 0, One = 1, Plus = 2, Minus = 3 };

// Thermal occupation law per original mode: P(n) = nbar^n / (1+nbar)^(n+1).
struct ThermalSpec {
    Eigen::VectorXd nbar;     // one entry per chain mode (not just kept ones)
    int trials = 100;
    std::uint64_t seed = 0;
    int excitation_cap = 8;   // M_max; sampled kept-mode sums are capped at M_max - 1
};

struct RejectionStats {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;

    double rate() const {
        const std::uint64_t total = accepted + rejected;
        return total == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(total);
    }
};

// Truncated model handed to the dynamics: the kept modes' frequencies and couplings,
// plus propagation controls.
struct DriveScenario {
    Eigen::VectorXd kept_freqs;  // relative frequencies of kept modes, rad/ms
    double spin_detuning = 0.0;
    std::vector<hamiltonian::ToneCoupling> tones;
    propagator::StepControl step;
    std::uint64_t max_dimension = 5'000'000;
};

// Prebuilt per-sector machinery (subspace, operator, cached dense eigendecomposition
// for small static sectors). prepare() must list every sector before concurrent use;
// lookups afterwards are read-only.
class SectorProvider {
  public:
    explicit SectorProvider(DriveScenario scenario);

    const DriveScenario& scenario() const { return scenario_; }
    void prepare(const std::vector<int>& totals);

    struct Sector {
        std::shared_ptr<const basis::Subspace> subspace;
        std::unique_ptr<hamiltonian::HamiltonianOperator> op;
        std::unique_ptr<propagator::DenseEig> dense;
    };
    const Sector& sector(int total_excitation) const;

  private:
    DriveScenario scenario_;
    std::map<int, Sector> sectors_;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<Eigen::Matrix2cd> rho;  // reduced spin state, basis (|0>, |1>)
    basis::FockConfig fock;
    std::uint64_t max_dimension = 0;
    double max_norm_drift = 0.0;
};

struct EnsembleResult {
    std::vector<double> times;
    // Mean reduced spin state per time, one series per initial state.
    std::array<std::vector<Eigen::Matrix2cd>, 4> mean_rho;
    // Standard error across trials of P0(from |0>) - P0(from |1>).
    std::vector<double> se_population_diff;
    // Standard error across trials of the |+> vs |-> trace distance.
    std::vector<double> se_trace_distance;
    int trials = 0;
    double rejection_rate = 0.0;
    double max_norm_drift = 0.0;
    std::uint64_t max_dimension = 0;
    std::vector<basis::FockConfig> sampled_focks;
};

int sample_geometric(double nbar, Rng& rng);

// Kept-mode occupations for one trial. Every chain mode is drawn (spectator modes
// merely consume draws; they never evolve), and the config is redrawn while the
// kept-mode sum exceeds excitation_cap - 1 so the spin-excited branch still fits.
basis::FockConfig sample_thermal(const ThermalSpec& spec, const std::vector<int>& kept_modes,
                                 Rng& rng, RejectionStats* stats = nullptr);

// Reduced spin dynamics from |spin> x |fock>. Number-basis spins evolve in a single
// total-excitation sector; |+> and |-> evolve both branches and combine them
// coherently into the exact reduced density matrix.
TrajectoryResult run_initial_state(InitialSpin spin, const basis::FockConfig& fock,
                                   const SectorProvider& provider,
                                   const std::vector<double>& times);

// Thermal ensemble over all four initial states with common random numbers: each
// trial draws one fock config and reuses the same two branch propagations for every
// initial state. `kept_modes` maps the provider's kept modes into the nbar table.
// Trials may run on `threads` workers; the reduction is performed in trial order, so
// results are identical for any thread count.
EnsembleResult run_ensemble(const ThermalSpec& thermal, const std::vector<int>& kept_modes,
                            SectorProvider& provider, const std::vector<double>& times,
                            int threads = 1);

}  // namespace ionsbm::evolve
