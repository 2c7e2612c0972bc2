#include "ionsbm/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <thread>

#include "ionsbm/errors.hpp"

namespace ionsbm::evolve {

using basis::FockConfig;
using basis::Spin;
using std::complex;

SectorProvider::SectorProvider(DriveScenario scenario) : scenario_(std::move(scenario)) {
    if (scenario_.kept_freqs.size() == 0)
        throw Error("evolve/bad_scenario", "at least one kept mode required");
    for (const auto& tone : scenario_.tones)
        if (tone.lambdas.size() != scenario_.kept_freqs.size())
            throw Error("evolve/bad_scenario", "tone couplings must cover the kept modes");
}

void SectorProvider::prepare(const std::vector<int>& totals) {
    for (int m : totals) {
        if (sectors_.count(m)) continue;
        Sector sector;
        sector.subspace = std::make_shared<basis::Subspace>(
            static_cast<int>(scenario_.kept_freqs.size()), m, scenario_.max_dimension);
        sector.op = std::make_unique<hamiltonian::HamiltonianOperator>(
            sector.subspace, scenario_.kept_freqs, scenario_.spin_detuning, scenario_.tones);
        if (!sector.op->time_dependent() && !scenario_.step.force_midpoint &&
            sector.subspace->dimension() <= scenario_.step.dense_cutoff)
            sector.dense = std::make_unique<propagator::DenseEig>(
                propagator::dense_eigendecomposition(*sector.op));
        sectors_.emplace(m, std::move(sector));
    }
}

const SectorProvider::Sector& SectorProvider::sector(int total_excitation) const {
    const auto it = sectors_.find(total_excitation);
    if (it == sectors_.end())
        throw Error("evolve/missing_sector",
                    "sector M=" + std::to_string(total_excitation) + " was not prepared");
    return it->second;
}

int sample_geometric(double nbar, Rng& rng) {
    if (nbar <= 0.0) return 0;
    const double q = nbar / (1.0 + nbar);
    const double u = rng.uniform53();  // (0, 1], so the log is finite
    return static_cast<int>(std::floor(std::log(u) / std::log(q)));
}

FockConfig sample_thermal(const ThermalSpec& spec, const std::vector<int>& kept_modes,
                          Rng& rng, RejectionStats* stats) {
    if (spec.excitation_cap < 1)
        throw Error("evolve/bad_thermal", "excitation_cap must be >= 1");
    for (int idx : kept_modes)
        if (idx < 0 || idx >= spec.nbar.size())
            throw Error("evolve/bad_thermal", "kept mode index outside nbar table");

    const int n_modes = static_cast<int>(spec.nbar.size());
    std::vector<int> all(n_modes);
    FockConfig config(kept_modes.size());
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (int mode = 0; mode < n_modes; ++mode) all[mode] = sample_geometric(spec.nbar[mode], rng);
        int kept_sum = 0;
        for (std::size_t j = 0; j < kept_modes.size(); ++j) {
            config[j] = all[kept_modes[j]];
            kept_sum += config[j];
        }
        if (kept_sum <= spec.excitation_cap - 1) {
            if (stats) stats->accepted += 1;
            return config;
        }
        if (stats) stats->rejected += 1;
    }
    throw Error("evolve/thermal_rejection",
                "thermal sampling rejected 10000 consecutive draws; raise excitation_cap "
                "(currently " + std::to_string(spec.excitation_cap) + ") or lower nbar");
}

namespace {

// Curves extracted from one branch propagation.
struct BranchCurves {
    std::vector<double> p_ground;  // sum over the spin-ground block of |psi|^2
    std::vector<double> p_excited;
    // Ground-block amplitudes per time, kept only when the cross term is needed.
    Eigen::MatrixXcd ground_block;
    double max_norm_drift = 0.0;
};

BranchCurves propagate_branch(const SectorProvider::Sector& sector,
                              const propagator::StepControl& ctrl, std::uint64_t seed_rank,
                              const std::vector<double>& times, bool keep_ground_block) {
    const auto dim = static_cast<long>(sector.subspace->dimension());
    const auto ground = static_cast<long>(sector.subspace->ground_count());

    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(dim);
    psi0[static_cast<long>(seed_rank)] = 1.0;

    BranchCurves curves;
    curves.p_ground.resize(times.size());
    curves.p_excited.resize(times.size());
    if (keep_ground_block) curves.ground_block.resize(ground, static_cast<long>(times.size()));

    propagator::propagate_grid(
        *sector.op, sector.dense.get(), psi0, times, ctrl,
        [&](std::size_t i, const Eigen::VectorXcd& psi) {
            const double pg = psi.head(ground).squaredNorm();
            const double pe = psi.tail(dim - ground).squaredNorm();
            curves.p_ground[i] = pg;
            curves.p_excited[i] = pe;
            curves.max_norm_drift =
                std::max(curves.max_norm_drift, std::abs(std::sqrt(pg + pe) - 1.0));
            if (keep_ground_block) curves.ground_block.col(static_cast<long>(i)) = psi.head(ground);
        });
    return curves;
}

// Exact reduced spin density matrices for all four initial states of one trial.
//
// With |psi_g(t)> = U_m |0, fock> and |psi_e(t)> = U_{m+1} |1, fock>, tracing the
// phonons out of (|psi_g> +- |psi_e>)/sqrt(2) gives
//   rho_00 = (Pg[psi_g] + Pg[psi_e]) / 2,   rho_11 = (Pe[psi_g] + Pe[psi_e]) / 2,
//   rho_01 = +- (1/2) sum_n <0,n|psi_g>* <1,n|psi_e>,
// where the cross sum runs over phonon configs with sum m: exactly the spin-ground
// block of sector m against the spin-excited block of sector m+1, which enumerate
// the same compositions in the same order. The conjugation is chosen so that an
// uncoupled spin's coherence rotates as exp(-i*Delta*t); magnitudes, populations,
// and trace distances do not depend on that orientation.
struct TrialCurves {
    std::vector<double> pg_g, pe_g, pg_e, pe_e;
    std::vector<complex<double>> cross;
    double max_norm_drift = 0.0;
    std::uint64_t max_dimension = 0;
};

TrialCurves run_trial(const FockConfig& fock, const SectorProvider& provider,
                      const std::vector<double>& times) {
    int m = 0;
    for (int n : fock) m += n;

    const auto& sector_g = provider.sector(m);
    const auto& sector_e = provider.sector(m + 1);
    const auto& ctrl = provider.scenario().step;

    TrialCurves out;
    out.max_dimension = std::max(sector_g.subspace->dimension(), sector_e.subspace->dimension());

    const std::uint64_t rank_g = sector_g.subspace->rank(Spin::Ground, fock);
    BranchCurves bg = propagate_branch(sector_g, ctrl, rank_g, times, true);

    const std::uint64_t rank_e = sector_e.subspace->rank(Spin::Excited, fock);
    const auto ground_e = static_cast<long>(sector_e.subspace->ground_count());
    const auto shared = static_cast<long>(sector_g.subspace->ground_count());

    out.pg_e.resize(times.size());
    out.pe_e.resize(times.size());
    out.cross.resize(times.size());
    const auto dim_e = static_cast<long>(sector_e.subspace->dimension());
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(dim_e);
    psi0[static_cast<long>(rank_e)] = 1.0;
    double drift_e = 0.0;
    propagator::propagate_grid(
        *sector_e.op, sector_e.dense.get(), psi0, times, ctrl,
        [&](std::size_t i, const Eigen::VectorXcd& psi) {
            const double pg = psi.head(ground_e).squaredNorm();
            const double pe = psi.tail(dim_e - ground_e).squaredNorm();
            out.pg_e[i] = pg;
            out.pe_e[i] = pe;
            drift_e = std::max(drift_e, std::abs(std::sqrt(pg + pe) - 1.0));
            out.cross[i] =
                bg.ground_block.col(static_cast<long>(i)).dot(psi.segment(ground_e, shared));
        });

    out.pg_g = std::move(bg.p_ground);
    out.pe_g = std::move(bg.p_excited);
    out.max_norm_drift = std::max(bg.max_norm_drift, drift_e);
    return out;
}

Eigen::Matrix2cd assemble_rho(InitialSpin spin, const TrialCurves& c, std::size_t i) {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    switch (spin) {
        case InitialSpin::Zero:
            rho(0, 0) = c.pg_g[i];
            rho(1, 1) = c.pe_g[i];
            break;
        case InitialSpin::One:
            rho(0, 0) = c.pg_e[i];
            rho(1, 1) = c.pe_e[i];
            break;
        case InitialSpin::Plus:
        case InitialSpin::Minus: {
            rho(0, 0) = 0.5 * (c.pg_g[i] + c.pg_e[i]);
            rho(1, 1) = 0.5 * (c.pe_g[i] + c.pe_e[i]);
            const complex<double> coh =
                (spin == InitialSpin::Plus ? 0.5 : -0.5) * c.cross[i];
            rho(0, 1) = coh;
            rho(1, 0) = std::conj(coh);
            break;
        }
    }
    return rho;
}

}  // namespace

TrajectoryResult run_initial_state(InitialSpin spin, const FockConfig& fock,
                                   const SectorProvider& provider,
                                   const std::vector<double>& times) {
    const TrialCurves curves = run_trial(fock, provider, times);
    TrajectoryResult result;
    result.times = times;
    result.fock = fock;
    result.max_dimension = curves.max_dimension;
    result.max_norm_drift = curves.max_norm_drift;
    result.rho.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) result.rho[i] = assemble_rho(spin, curves, i);
    return result;
}

EnsembleResult run_ensemble(const ThermalSpec& thermal, const std::vector<int>& kept_modes,
                            SectorProvider& provider, const std::vector<double>& times,
                            int threads) {
    if (thermal.trials < 1) throw Error("evolve/bad_thermal", "at least one trial required");
    if (kept_modes.size() != static_cast<std::size_t>(provider.scenario().kept_freqs.size()))
        throw Error("evolve/bad_thermal", "kept mode list must match the provider");

    // Draw every trial's occupations up front; sampling is deterministic per
    // (seed, trial) regardless of execution order below.
    RejectionStats stats;
    std::vector<FockConfig> focks(thermal.trials);
    for (int s = 0; s < thermal.trials; ++s) {
        Rng rng(thermal.seed, static_cast<std::uint64_t>(s));
        focks[s] = sample_thermal(thermal, kept_modes, rng, &stats);
    }
    if (stats.rate() > 0.5)
        throw Error("evolve/thermal_rejection",
                    "thermal sampling rejected " + std::to_string(stats.rejected) + " of " +
                        std::to_string(stats.accepted + stats.rejected) +
                        " draws; raise excitation_cap (currently " +
                        std::to_string(thermal.excitation_cap) + ")");

    std::set<int> totals;
    for (const auto& fock : focks) {
        int m = 0;
        for (int n : fock) m += n;
        totals.insert(m);
        totals.insert(m + 1);
    }
    provider.prepare(std::vector<int>(totals.begin(), totals.end()));

    std::vector<TrialCurves> curves(thermal.trials);
    auto worker = [&](int first, int stride) {
        for (int s = first; s < thermal.trials; s += stride)
            curves[s] = run_trial(focks[s], provider, times);
    };
    const int n_threads = std::max(1, std::min(threads, thermal.trials));
    if (n_threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t, n_threads);
        for (auto& th : pool) th.join();
    }

    const std::size_t nt = times.size();
    EnsembleResult result;
    result.times = times;
    result.trials = thermal.trials;
    result.rejection_rate = stats.rate();
    result.sampled_focks = focks;
    for (auto& series : result.mean_rho)
        series.assign(nt, Eigen::Matrix2cd::Zero());
    result.se_population_diff.assign(nt, 0.0);
    result.se_trace_distance.assign(nt, 0.0);

    // Fixed-order reduction: trial 0 first, always.
    const double inv_s = 1.0 / thermal.trials;
    for (int s = 0; s < thermal.trials; ++s) {
        const TrialCurves& c = curves[s];
        result.max_norm_drift = std::max(result.max_norm_drift, c.max_norm_drift);
        result.max_dimension = std::max(result.max_dimension, c.max_dimension);
        for (std::size_t i = 0; i < nt; ++i)
            for (int state = 0; state < 4; ++state)
                result.mean_rho[state][i] += inv_s * assemble_rho(static_cast<InitialSpin>(state), c, i);
    }

    // Standard errors from the spread across trials (common random numbers make the
    // population difference a per-trial quantity; the |+>/|-> trace distance of one
    // trial is |cross| since the pair differs only in the coherence sign).
    if (thermal.trials > 1) {
        for (std::size_t i = 0; i < nt; ++i) {
            double mean_d = 0.0, mean_td = 0.0;
            for (int s = 0; s < thermal.trials; ++s) {
                mean_d += curves[s].pg_g[i] - curves[s].pg_e[i];
                mean_td += std::abs(curves[s].cross[i]);
            }
            mean_d *= inv_s;
            mean_td *= inv_s;
            double var_d = 0.0, var_td = 0.0;
            for (int s = 0; s < thermal.trials; ++s) {
                const double dd = (curves[s].pg_g[i] - curves[s].pg_e[i]) - mean_d;
                const double dt = std::abs(curves[s].cross[i]) - mean_td;
                var_d += dd * dd;
                var_td += dt * dt;
            }
            const double norm = 1.0 / (thermal.trials * (thermal.trials - 1.0));
            result.se_population_diff[i] = std::sqrt(var_d * norm);
            result.se_trace_distance[i] = std::sqrt(var_td * norm);
        }
    }
    return result;
}

}  // namespace ionsbm::evolve
