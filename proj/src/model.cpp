#include "pmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "pmdp/errors.hpp"

namespace pmdp {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kMeanRewardTol = 1e-9;
constexpr double kInvariantTol = 1e-12;

std::string where(State s, Action a) {
  std::ostringstream os;
  os << "(s=" << s << ", a=" << a << ")";
  return os.str();
}

}  // namespace

void ModelData::set_factored(State s, Action a, const std::vector<std::vector<double>>& obs,
                             const std::vector<std::vector<double>>& trans,
                             const std::vector<double>& symbol_rewards) {
  const std::size_t n_params = params.size();
  if (obs.size() != n_params || trans.size() != n_params) {
    throw InvalidModel("set_factored: kernels must have one row per parameter");
  }
  const std::size_t n_symbols = symbol_rewards.size();
  PairTable table;
  for (std::size_t o = 0; o < n_symbols; ++o) {
    for (State next = 0; next < num_states; ++next) {
      bool any = false;
      for (std::size_t k = 0; k < n_params; ++k) {
        if (obs[k].size() != n_symbols || trans[k].size() != num_states) {
          throw InvalidModel("set_factored: kernel row has the wrong length");
        }
        any = any || obs[k][o] * trans[k][next] > 0.0;
      }
      if (any) table.outcomes.push_back({o, next, symbol_rewards[o]});
    }
  }
  table.probs.reserve(n_params * table.outcomes.size());
  for (std::size_t k = 0; k < n_params; ++k) {
    for (const Outcome& out : table.outcomes) {
      table.probs.push_back(obs[k][out.symbol] * trans[k][out.next_state]);
    }
  }
  pair(s, a) = std::move(table);
}

PmdpModel::PmdpModel(ModelData data) : data_(std::move(data)) {
  const std::size_t n_states = data_.num_states;
  const std::size_t n_actions = data_.action_names.size();
  const std::size_t n_params = data_.params.size();
  if (n_states == 0 || n_actions == 0 || n_params == 0) {
    throw InvalidModel("model needs at least one state, action and parameter");
  }
  if (data_.pairs.size() != n_states * n_actions) {
    throw InvalidModel("pair table size must equal |states| * |actions|");
  }
  for (double v : data_.params) {
    if (!std::isfinite(v)) throw InvalidModel("parameter payloads must be finite");
  }

  feasible_.resize(n_states);
  mean_reward_.assign(n_params * n_states * n_actions, 0.0);
  log_probs_.resize(n_states * n_actions);
  invariant_.assign(n_states * n_actions, 1);

  double observed_bound = 0.0;
  for (State s = 0; s < n_states; ++s) {
    for (Action a = 0; a < n_actions; ++a) {
      const PairTable& table = pair(s, a);
      const std::size_t n_out = table.outcomes.size();
      if (n_out == 0) {
        if (!table.probs.empty()) throw InvalidModel("infeasible pair with probabilities " + where(s, a));
        continue;
      }
      feasible_[s].push_back(a);
      if (table.probs.size() != n_params * n_out) {
        throw InvalidModel("probability table has the wrong size at " + where(s, a));
      }
      std::set<std::pair<std::size_t, State>> seen;
      for (const Outcome& out : table.outcomes) {
        if (out.next_state >= n_states) throw InvalidModel("next state out of range at " + where(s, a));
        if (!std::isfinite(out.reward)) throw InvalidModel("non-finite reward at " + where(s, a));
        if (!seen.emplace(out.symbol, out.next_state).second) {
          throw InvalidModel("duplicate outcome at " + where(s, a));
        }
      }

      auto& logs = log_probs_[s * n_actions + a];
      logs.resize(table.probs.size());
      for (ParamIndex k = 0; k < n_params; ++k) {
        double sum = 0.0;
        double mean = 0.0;
        for (std::size_t j = 0; j < n_out; ++j) {
          const double p = table.probs[k * n_out + j];
          if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InvalidModel("negative or non-finite probability at " + where(s, a));
          }
          sum += p;
          mean += p * table.outcomes[j].reward;
          logs[k * n_out + j] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
          std::ostringstream os;
          os << "row for theta " << k << " at " << where(s, a) << " sums to " << sum;
          throw InvalidModel(os.str());
        }
        mean_reward_[(k * n_states + s) * n_actions + a] = mean;
        observed_bound = std::max(observed_bound, std::abs(mean));
      }

      // Absolute continuity in both directions: supports agree across hypotheses.
      for (std::size_t j = 0; j < n_out; ++j) {
        const bool positive = table.probs[j] > 0.0;
        for (ParamIndex k = 1; k < n_params; ++k) {
          if ((table.probs[k * n_out + j] > 0.0) != positive) {
            throw InvalidModel("outcome supports differ between hypotheses at " + where(s, a));
          }
          if (std::abs(table.probs[k * n_out + j] - table.probs[j]) > kInvariantTol) {
            invariant_[s * n_actions + a] = 0;
          }
        }
      }
    }
    if (feasible_[s].empty()) {
      throw InvalidModel("state " + std::to_string(s) + " has no feasible action");
    }
  }

  if (!data_.mean_reward.empty()) {
    if (data_.mean_reward.size() != mean_reward_.size()) {
      throw InvalidModel("mean reward table has the wrong size");
    }
    for (std::size_t i = 0; i < mean_reward_.size(); ++i) {
      const double declared = data_.mean_reward[i];
      if (std::isnan(declared) && std::isnan(mean_reward_[i])) continue;
      if (!(std::abs(declared - mean_reward_[i]) <= kMeanRewardTol)) {
        throw InvalidModel("declared mean reward disagrees with the outcome-weighted mean");
      }
    }
  }

  if (data_.reward_bound > 0.0) {
    if (observed_bound > data_.reward_bound) {
      throw InvalidModel("mean reward exceeds the declared bound");
    }
    reward_bound_ = data_.reward_bound;
  } else {
    reward_bound_ = observed_bound;
  }
}

std::optional<Action> PmdpModel::find_action(const std::string& name) const {
  const auto it = std::find(data_.action_names.begin(), data_.action_names.end(), name);
  if (it == data_.action_names.end()) return std::nullopt;
  return static_cast<Action>(it - data_.action_names.begin());
}

std::span<const double> PmdpModel::outcome_probs(ParamIndex theta, State s, Action a) const {
  const PairTable& table = pair(s, a);
  const std::size_t n = table.outcomes.size();
  return std::span<const double>(table.probs).subspan(theta * n, n);
}

std::span<const double> PmdpModel::log_outcome_probs(ParamIndex theta, State s, Action a) const {
  const auto& logs = log_probs_[s * num_actions() + a];
  const std::size_t n = pair(s, a).outcomes.size();
  return std::span<const double>(logs).subspan(theta * n, n);
}

std::optional<std::size_t> PmdpModel::find_outcome(State s, Action a, const Observation& obs) const {
  const auto& outs = pair(s, a).outcomes;
  for (std::size_t j = 0; j < outs.size(); ++j) {
    if (outs[j].symbol == obs.symbol && outs[j].next_state == obs.next_state) return j;
  }
  return std::nullopt;
}

double PmdpModel::joint_prob(ParamIndex theta, State s, Action a, const Observation& obs) const {
  const auto j = find_outcome(s, a, obs);
  return j ? outcome_probs(theta, s, a)[*j] : 0.0;
}

double PmdpModel::transition_prob(ParamIndex theta, State s, Action a, State next) const {
  const auto outs = outcomes(s, a);
  const auto probs = outcome_probs(theta, s, a);
  double p = 0.0;
  for (std::size_t j = 0; j < outs.size(); ++j) {
    if (outs[j].next_state == next) p += probs[j];
  }
  return p;
}

double PmdpModel::observation_prob(ParamIndex theta, State s, Action a, std::size_t symbol) const {
  const auto outs = outcomes(s, a);
  const auto probs = outcome_probs(theta, s, a);
  double p = 0.0;
  for (std::size_t j = 0; j < outs.size(); ++j) {
    if (outs[j].symbol == symbol) p += probs[j];
  }
  return p;
}

std::size_t PmdpModel::alphabet_size(State s, Action a) const {
  std::size_t n = 0;
  for (const Outcome& out : outcomes(s, a)) n = std::max(n, out.symbol + 1);
  return n;
}

}  // namespace pmdp
