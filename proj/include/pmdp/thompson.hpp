#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pmdp/model.hpp"
#include "pmdp/posterior.hpp"
#include "pmdp/solver.hpp"
#include "pmdp/trajectory.hpp"

namespace pmdp {

/// Optimal policies of every hypothesis, solved once before sampling.
struct PolicyCache {
  std::vector<SolveResult> solutions;
  std::uint64_t model_hash = 0;

  Action action(ParamIndex theta, State s) const { return solutions[theta].policy[s]; }
  double gain(ParamIndex theta) const { return solutions[theta].gain; }
};

/// Solves every hypothesis; `workers` > 1 solves them concurrently.
PolicyCache build_policy_cache(const PmdpModel& model, const RviOptions& opts = {}, std::size_t workers = 1);

/// Throws InvalidArgument if the cache does not belong to `model`.
void validate_cache(const PolicyCache& cache, const PmdpModel& model);

/// Plain-text cache: header with the model hash, then per-hypothesis gain,
/// iterations, residual, policy and bias lines.
void save_policy_cache(const std::filesystem::path& path, const PolicyCache& cache);
PolicyCache load_policy_cache(const std::filesystem::path& path);

/// Loads `path` when it exists and matches `model`; otherwise solves and writes it.
PolicyCache load_or_build_policy_cache(const std::filesystem::path& path, const PmdpModel& model,
                                       const RviOptions& opts = {}, std::size_t workers = 1);

/**
 * Seed of sample path `index` under `master_seed`:
 * splitmix64(master_seed ^ splitmix64(index + 1)). Each path owns an
 * independent mt19937_64 stream seeded with it, so adding paths never
 * changes earlier ones.
 */
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index);
std::uint64_t splitmix64(std::uint64_t x);

/**
 * One Thompson-sampling path of length T from `initial_state`: each epoch
 * draws a hypothesis from the posterior, applies its cached optimal action,
 * draws the outcome from the true hypothesis and updates the posterior.
 * Per epoch the engine is called twice, first for the hypothesis draw and
 * then for the outcome draw.
 */
Trajectory run_path(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true,
                    const Posterior& prior, std::size_t horizon, std::uint64_t seed,
                    State initial_state = 0);

/// J*_{theta_true} - rbar_{theta_true}(s, a).
double regret_increment(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true, State s,
                        Action a);

/**
 * Bellman gap J* + h*(s) - rbar(s, a) - sum_s' p(s'|s,a) h*(s') under the true
 * hypothesis, where h* is the cached bias. Nonnegative up to the solver
 * tolerance and zero for optimal actions. Summed along a path it equals the
 * summed regret increments plus h*(S_0) - h*(S_t) plus a zero-mean martingale.
 */
double bellman_gap(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true, State s, Action a);

}  // namespace pmdp
