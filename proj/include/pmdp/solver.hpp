#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pmdp/model.hpp"

namespace pmdp {

/// Average-reward solution for one parameter hypothesis.
struct SolveResult {
  /// Stationary policy, one action per state.
  std::vector<Action> policy;
  /// Long-run average reward per epoch.
  double gain = 0.0;
  /// Relative values anchored so that bias[kReferenceState] == 0.
  std::vector<double> bias;
  std::size_t iterations = 0;
  /// Span of the final Bellman difference T(h) - h.
  double residual = 0.0;
  /// Whether the aperiodicity transform had to be switched on.
  bool damped = false;

  friend bool operator==(const SolveResult&, const SolveResult&) = default;
};

inline constexpr State kReferenceState = 0;

struct RviOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
  /// Weight tau of the damped update h <- (1 - tau) h + tau T(h).
  double damping = 0.5;
  /// Plain iteration switches to the damped update when the span has not
  /// decreased over this many iterations.
  std::size_t stall_window = 100;
};

/**
 * Relative value iteration for the average-reward criterion.
 *
 * Stops once span(T(h) - h) <= tol; the returned gain is the midpoint of
 * [min, max] of that difference, so it is within tol / 2 of the optimal gain.
 * The policy is greedy with respect to the returned bias with ties broken
 * toward the lowest action index.
 *
 * Throws NoConvergence after max_iter iterations.
 */
SolveResult relative_value_iteration(const PmdpModel& model, ParamIndex theta,
                                     const RviOptions& opts = {});

/// Gain of a stationary policy from the stationary distribution of its
/// recurrent class. Throws Multichain for chains with several recurrent classes.
double policy_gain(const PmdpModel& model, ParamIndex theta, std::span<const Action> policy);

}  // namespace pmdp
