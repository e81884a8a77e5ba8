#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "pmdp/model.hpp"
#include "pmdp/solver.hpp"

namespace pmdp::fixtures {

/// One state, one action; symbol 1 = arrival with probability theta.
inline PmdpModel bernoulli_model(std::vector<double> thetas = {0.2, 0.8}) {
  ModelData d;
  d.name = "bernoulli";
  d.num_states = 1;
  d.action_names = {"observe"};
  d.params = thetas;
  d.pairs.resize(1);
  std::vector<std::vector<double>> obs, trans;
  for (double th : thetas) {
    obs.push_back({1.0 - th, th});
    trans.push_back({1.0});
  }
  d.set_factored(0, 0, obs, trans, {0.0, 1.0});
  return PmdpModel(std::move(d));
}

/// Two hypotheses with identical kernels everywhere: nothing can be learned.
inline PmdpModel stall_model() {
  ModelData d;
  d.name = "stall";
  d.num_states = 2;
  d.action_names = {"a0", "a1"};
  d.params = {1.0, 2.0};
  d.pairs.resize(4);
  const std::vector<std::vector<double>> obs{{0.3, 0.7}, {0.3, 0.7}};
  d.set_factored(0, 0, obs, {{0.5, 0.5}, {0.5, 0.5}}, {1.0, 0.0});
  d.set_factored(0, 1, obs, {{0.1, 0.9}, {0.1, 0.9}}, {0.5, 0.5});
  d.set_factored(1, 0, obs, {{0.6, 0.4}, {0.6, 0.4}}, {0.0, 2.0});
  d.set_factored(1, 1, obs, {{0.2, 0.8}, {0.2, 0.8}}, {0.2, 0.3});
  return PmdpModel(std::move(d));
}

/// Single-hypothesis MDP with fixed per-(s, a) rewards; outcome j moves to state j.
inline PmdpModel mdp_from_tables(const std::vector<std::vector<std::vector<double>>>& P,
                                 const std::vector<std::vector<double>>& r) {
  ModelData d;
  d.name = "mdp";
  d.num_states = P.size();
  for (std::size_t a = 0; a < P[0].size(); ++a) d.action_names.push_back("a" + std::to_string(a));
  d.params = {0.0};
  d.pairs.resize(P.size() * P[0].size());
  for (State s = 0; s < P.size(); ++s) {
    for (Action a = 0; a < P[s].size(); ++a) {
      PairTable& pt = d.pair(s, a);
      for (State n = 0; n < P[s][a].size(); ++n) {
        pt.outcomes.push_back({0, n, r[s][a]});
        pt.probs.push_back(P[s][a][n]);
      }
    }
  }
  return PmdpModel(std::move(d));
}

/// Random MDP with strictly positive kernels (hence ergodic under every policy).
inline PmdpModel random_positive_mdp(std::mt19937_64& rng, std::size_t ns, std::size_t na) {
  std::uniform_real_distribution<double> u(0.05, 1.0), rew(-5.0, 5.0);
  std::vector<std::vector<std::vector<double>>> P(ns, std::vector<std::vector<double>>(na));
  std::vector<std::vector<double>> r(ns, std::vector<double>(na));
  for (State s = 0; s < ns; ++s) {
    for (Action a = 0; a < na; ++a) {
      double total = 0.0;
      for (State n = 0; n < ns; ++n) total += P[s][a].emplace_back(u(rng));
      for (double& p : P[s][a]) p /= total;
      r[s][a] = rew(rng);
    }
  }
  return mdp_from_tables(P, r);
}

/// Stationary distribution by power iteration on the lazy chain (I + P) / 2.
inline std::vector<double> power_stationary(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  std::vector<double> d(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * d[j];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[j] += 0.5 * d[i] * P[i][j];
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - d[j]));
    d.swap(next);
    if (diff < 1e-16) break;
  }
  return d;
}

/// Gain of a stationary policy of a single-hypothesis model via power iteration.
inline double brute_gain(const PmdpModel& m, ParamIndex theta, const std::vector<Action>& policy) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
  for (State s = 0; s < n; ++s) {
    const auto outs = m.outcomes(s, policy[s]);
    const auto probs = m.outcome_probs(theta, s, policy[s]);
    for (std::size_t j = 0; j < outs.size(); ++j) P[s][outs[j].next_state] += probs[j];
  }
  const std::vector<double> d = power_stationary(P);
  double g = 0.0;
  for (State s = 0; s < n; ++s) g += d[s] * m.mean_reward(theta, s, policy[s]);
  return g;
}

struct BruteOptimum {
  double gain = -INFINITY;
  std::vector<std::vector<Action>> optimal_policies;
};

/// Enumerates every deterministic stationary policy.
inline BruteOptimum brute_force(const PmdpModel& m, ParamIndex theta, double tie_tol = 1e-9) {
  const std::size_t n = m.num_states(), na = m.num_actions();
  std::size_t count = 1;
  for (std::size_t s = 0; s < n; ++s) count *= na;
  std::vector<std::pair<double, std::vector<Action>>> all;
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<Action> pol(n);
    std::size_t c = code;
    for (State s = 0; s < n; ++s) {
      pol[s] = c % na;
      c /= na;
    }
    all.emplace_back(brute_gain(m, theta, pol), pol);
  }
  BruteOptimum best;
  for (const auto& [g, pol] : all) best.gain = std::max(best.gain, g);
  for (const auto& [g, pol] : all) {
    if (g >= best.gain - tie_tol) best.optimal_policies.push_back(pol);
  }
  return best;
}

}  // namespace pmdp::fixtures
