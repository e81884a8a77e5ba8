#include "pmdp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmdp/errors.hpp"

namespace pmdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalizes in place; returns false when every entry is -inf.
bool normalize_log(std::span<double> logw) {
  const double m = *std::max_element(logw.begin(), logw.end());
  if (m == kNegInf) return false;
  double sum = 0.0;
  for (double x : logw) sum += std::exp(x - m);
  const double lse = m + std::log(sum);
  for (double& x : logw) x -= lse;
  return true;
}

std::size_t checked_outcome(const PmdpModel& model, State s, Action a, const Observation& obs) {
  if (s >= model.num_states() || a >= model.num_actions() || !model.feasible(s, a)) {
    throw InvalidArgument("posterior update at an infeasible state-action pair");
  }
  const auto j = model.find_outcome(s, a, obs);
  if (!j) throw InvalidArgument("observation is not in the outcome set of the acting pair");
  return *j;
}

}  // namespace

Posterior Posterior::uniform(std::size_t n) {
  if (n == 0) throw InvalidArgument("posterior over an empty parameter set");
  return Posterior(std::vector<double>(n, -std::log(static_cast<double>(n))));
}

Posterior Posterior::point_mass(std::size_t n, ParamIndex theta) {
  if (theta >= n) throw InvalidArgument("point mass outside the parameter set");
  std::vector<double> logw(n, kNegInf);
  logw[theta] = 0.0;
  return Posterior(std::move(logw));
}

Posterior Posterior::from_probabilities(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("posterior over an empty parameter set");
  std::vector<double> logw;
  logw.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("prior weights must be finite and nonnegative");
    logw.push_back(p > 0.0 ? std::log(p) : kNegInf);
  }
  return from_log_weights(std::move(logw));
}

Posterior Posterior::from_log_weights(std::vector<double> logw) {
  if (logw.empty()) throw InvalidArgument("posterior over an empty parameter set");
  for (double x : logw) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw InvalidArgument("log-weights must be finite or -inf");
    }
  }
  if (!normalize_log(logw)) throw InvalidArgument("posterior has no positive mass");
  return Posterior(std::move(logw));
}

double Posterior::prob(ParamIndex theta) const { return std::exp(logw_.at(theta)); }

std::vector<double> Posterior::probabilities() const {
  std::vector<double> out(logw_.size());
  std::transform(logw_.begin(), logw_.end(), out.begin(), [](double x) { return std::exp(x); });
  return out;
}

double Posterior::error(ParamIndex theta) const {
  double err = 0.0;
  for (std::size_t k = 0; k < logw_.size(); ++k) {
    if (k != theta) err += std::exp(logw_[k]);
  }
  return std::min(err, 1.0);
}

void update_log_weights(std::span<double> logw, std::span<double> probs, const PmdpModel& model,
                        State s, Action a, std::size_t outcome) {
  if (model.update_invariant(s, a)) return;
  const std::size_t n = logw.size();
  double m = kNegInf;
  for (ParamIndex k = 0; k < n; ++k) {
    const double x = logw[k] + model.log_outcome_probs(k, s, a)[outcome];
    probs[k] = x;
    m = std::max(m, x);
  }
  if (m == kNegInf) {
    // Restore exp(logw) before reporting; the weights were not touched.
    for (ParamIndex k = 0; k < n; ++k) probs[k] = std::exp(logw[k]);
    throw AllZeroLikelihood("every hypothesis with positive mass assigns zero probability to the observation");
  }
  double sum = 0.0;
  for (ParamIndex k = 0; k < n; ++k) sum += std::exp(probs[k] - m);
  const double lse = m + std::log(sum);
  for (ParamIndex k = 0; k < n; ++k) {
    logw[k] = probs[k] - lse;
    probs[k] = std::exp(logw[k]);
  }
}

Posterior posterior_update(const Posterior& post, const PmdpModel& model, State s, Action a,
                           const Observation& obs) {
  if (post.size() != model.num_params()) throw InvalidArgument("posterior size does not match the model");
  const std::size_t j = checked_outcome(model, s, a, obs);
  std::vector<double> logw(post.log_weights().begin(), post.log_weights().end());
  std::vector<double> probs(logw.size());
  update_log_weights(logw, probs, model, s, a, j);
  return Posterior(std::move(logw));
}

Posterior posterior_from_history(const Posterior& prior, const PmdpModel& model,
                                 std::span<const HistoryStep> history) {
  if (prior.size() != model.num_params()) throw InvalidArgument("posterior size does not match the model");
  std::vector<double> loglik(model.num_params(), 0.0);
  for (const HistoryStep& step : history) {
    const std::size_t j = checked_outcome(model, step.state, step.action, step.obs);
    for (ParamIndex k = 0; k < loglik.size(); ++k) {
      loglik[k] += model.log_outcome_probs(k, step.state, step.action)[j];
    }
  }
  std::vector<double> logw(prior.log_weights().begin(), prior.log_weights().end());
  for (ParamIndex k = 0; k < logw.size(); ++k) logw[k] += loglik[k];
  if (*std::max_element(logw.begin(), logw.end()) == kNegInf) {
    throw AllZeroLikelihood("history has zero likelihood under every hypothesis with positive prior mass");
  }
  return Posterior::from_log_weights(std::move(logw));
}

bool is_update_invariant(const PmdpModel& model, State s, Action a) {
  return model.update_invariant(s, a);
}

std::size_t sample_index(std::span<const double> probs, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    cum += probs[k];
    last_positive = k;
    if (u < cum) return k;
  }
  return last_positive;
}

ParamIndex sample_param(const Posterior& post, Rng& rng) {
  const auto probs = post.probabilities();
  return sample_index(probs, uniform01(rng));
}

}  // namespace pmdp
