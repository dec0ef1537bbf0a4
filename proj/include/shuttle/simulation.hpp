#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "shuttle/chain.hpp"
#include "shuttle/dynamic.hpp"
#include "shuttle/grid.hpp"

namespace shuttle {

struct SimConfig {
    double h = 1e-4;              // Euler step (diffusions only)
    std::size_t replicas = 10000;
    std::uint64_t seed = 1;
    double max_time = 1000.0;     // censoring cap: time for diffusions and CTMCs
    std::size_t max_steps = 10'000'000;  // censoring cap for discrete-time chains
    unsigned threads = 1;

    void validate() const;
};

struct EstimateWithCI {
    double mean = 0.0;
    double se = 0.0;
    std::size_t replicas = 0;  // uncensored replicas entering the mean
    std::size_t censored = 0;
};

// Either the running cost (estimate E[int f]) or a discount rate (estimate E[exp(-int alpha)]).
enum class Functional { additive, discounted };

struct ReplicaSample {
    double value = 0.0;
    double duration = 0.0;  // shuttle time, or number of steps for discrete chains
    bool censored = false;
};

// Independent per-replica generator derived from (seed, replica).
std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica);

// Pairwise sum in index order.
double pairwise_sum(std::span<const double> values);

// Mean and standard error over uncensored samples; writes CSV rows if csv is set.
EstimateWithCI summarize(std::span<const ReplicaSample> samples, std::ostream* csv = nullptr);

/**
 * Runs fn(replica) for every replica, spreading contiguous blocks over
 * config.threads workers. Results are indexed by replica, so the outcome does
 * not depend on the thread count.
 */
std::vector<ReplicaSample> run_replicas(const SimConfig& config,
                                        const std::function<ReplicaSample(std::size_t)>& fn);

/**
 * Shuttle functional of the reflected diffusion with scale density s, by
 * Euler steps of Y = s(X) (driftless, coefficient s' sigma) with folding at
 * the boundaries. rate is f or alpha per cell.
 */
// Heuristic: h > cell_width^2 / max (s' sigma)^2 means one step spans several cells.
bool step_exceeds_grid(const ScaleDensity& s, const CoefficientField& sigma2, double h);

EstimateWithCI simulate_diffusion_shuttle(const ScaleDensity& s, const CoefficientField& sigma2,
                                          const CoefficientField& rate, Functional functional,
                                          const SimConfig& config, std::ostream* csv = nullptr);
std::vector<ReplicaSample> diffusion_shuttle_samples(const ScaleDensity& s, const CoefficientField& sigma2,
                                                     const CoefficientField& rate, Functional functional,
                                                     const SimConfig& config);

/// State of a controlled path at one instant.
struct PathState {
    double time = 0.0;
    double accrued = 0.0;  // int rate dt, sum f, or prod rho (chains, discounted)
    double x = 0.0;
    double max = 0.0;
    bool after_top = false;
    bool done = false;     // shuttle completed
    bool censored = false;
};

// Path state at min(window, S) for each replica. With stop_at_top the walk halts on the
// step reaching the top instead; that state keeps the overshoot x > top and the pre-top phase.
std::vector<PathState> diffusion_window_states(const ScaleDensity& s, const CoefficientField& sigma2,
                                               const CoefficientField& rate, double window,
                                               const SimConfig& config, bool stop_at_top = false);

// One recorded path, sampled every record_every steps and at the end.
ControlledPath sample_diffusion_path(const ScaleDensity& s, const CoefficientField& sigma2,
                                     const CoefficientField& rate, const SimConfig& config,
                                     std::size_t replica, std::size_t record_every);

enum class ChainTime { discrete, continuous };

/**
 * Exact shuttle simulation of a chain. values are f (additive) or rho
 * (discounted) per state; waiting steps accrue f and rho as ordinary steps.
 */
EstimateWithCI simulate_chain_shuttle(const BDChain& chain, std::span<const double> values,
                                      Functional functional, const SimConfig& config,
                                      std::ostream* csv = nullptr);

/**
 * Continuous-time chain with exponential holding times. values are f
 * (additive, accrued as f * holding time) or alpha (discounted).
 */
EstimateWithCI simulate_ctmc_shuttle(const CtmcRates& rates, std::span<const double> values,
                                     Functional functional, const SimConfig& config,
                                     std::ostream* csv = nullptr);

// Chain state after min(window_steps, S) steps; window_steps = 0 means run to S.
std::vector<PathState> chain_window_states(const BDChain& chain, std::span<const double> values,
                                           Functional functional, std::size_t window_steps,
                                           const SimConfig& config);

ChainPath sample_chain_path(const BDChain& chain, std::span<const double> values, Functional functional,
                            const SimConfig& config, std::size_t replica);

enum class Expectation { martingale, submartingale, supermartingale };
enum class Verdict { pass, fail, inconclusive };

const char* verdict_name(Verdict v);
const char* expectation_name(Expectation e);

struct MartingaleReport {
    Expectation expected = Expectation::martingale;
    Verdict verdict = Verdict::inconclusive;
    double mean_increment = 0.0;
    double se = 0.0;
    double z = 0.0;
    std::size_t replicas = 0;
    std::size_t censored = 0;
};

/**
 * Tests E[V_end - V_start] against the expected sign. A martingale passes
 * with |z| < 3; a sub/supermartingale needs z > 3 / z < -3. Too few replicas
 * or a z of the right sign below 3 is inconclusive, never a pass.
 */
MartingaleReport martingale_test(double v_start, std::span<const double> v_end, std::size_t censored,
                                 Expectation expected, std::size_t min_replicas = 1000);

// Evaluates a Bellman process at the window end of every uncensored replica.
// Diffusion windows end at the first step reaching the top, so increments are taken while M < top.
using StateEvaluator = std::function<double(const PathState&)>;
MartingaleReport diffusion_martingale_test(const ScaleDensity& s, const CoefficientField& sigma2,
                                           const CoefficientField& rate, const StateEvaluator& bellman,
                                           double window, Expectation expected, const SimConfig& config);
MartingaleReport chain_martingale_test(const BDChain& chain, std::span<const double> values,
                                       Functional functional, const StateEvaluator& bellman,
                                       std::size_t window_steps, Expectation expected,
                                       const SimConfig& config);

}  // namespace shuttle
