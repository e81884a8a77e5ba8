#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "pmdp/model.hpp"

namespace pmdp {

/**
 * Probability vector over the parameter hypotheses, stored as normalized
 * log-weights. Hypotheses with zero mass hold -infinity.
 */
class Posterior {
 public:
  static Posterior uniform(std::size_t n);
  static Posterior point_mass(std::size_t n, ParamIndex theta);
  /// Normalizes `probs`, which must be nonnegative with a positive sum.
  static Posterior from_probabilities(std::span<const double> probs);
  /// Normalizes arbitrary log-weights with a log-sum-exp.
  static Posterior from_log_weights(std::vector<double> logw);

  std::size_t size() const { return logw_.size(); }
  std::span<const double> log_weights() const { return logw_; }
  double prob(ParamIndex theta) const;
  std::vector<double> probabilities() const;

  /// 1 - pi(theta), summed over the other hypotheses to avoid cancellation.
  double error(ParamIndex theta) const;

  friend bool operator==(const Posterior&, const Posterior&) = default;

 private:
  friend Posterior posterior_update(const Posterior&, const PmdpModel&, State, Action,
                                    const Observation&);
  explicit Posterior(std::vector<double> logw) : logw_(std::move(logw)) {}
  std::vector<double> logw_;
};

/// A single (state, action, observation) step of a history.
struct HistoryStep {
  State state = 0;
  Action action = 0;
  Observation obs;
};

/**
 * One Bayes step: pi'(theta) is proportional to pi(theta) * nu_theta(obs | s, a).
 * Pairs whose joint law does not depend on theta return the input unchanged.
 *
 * Throws InvalidArgument for infeasible pairs or observations outside the
 * pair's outcome set, and AllZeroLikelihood when no hypothesis with positive
 * mass can produce the observation.
 */
Posterior posterior_update(const Posterior& post, const PmdpModel& model, State s, Action a,
                           const Observation& obs);

/// Posterior after a whole history: prior times the full likelihood product,
/// normalized once.
Posterior posterior_from_history(const Posterior& prior, const PmdpModel& model,
                                 std::span<const HistoryStep> history);

bool is_update_invariant(const PmdpModel& model, State s, Action a);

/**
 * In-place update of normalized log-weights by outcome `outcome` of (s, a).
 * On return `probs` holds exp(logw). Used by the sampler's inner loop.
 */
void update_log_weights(std::span<double> logw, std::span<double> probs, const PmdpModel& model,
                        State s, Action a, std::size_t outcome);

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) from the top 53 bits of one engine output.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw from a probability vector given a uniform `u`. Falls back
/// to the last positive entry when rounding leaves the cumulative sum short.
std::size_t sample_index(std::span<const double> probs, double u);

ParamIndex sample_param(const Posterior& post, Rng& rng);

}  // namespace pmdp
