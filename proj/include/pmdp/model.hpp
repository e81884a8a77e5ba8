#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pmdp {

using State = std::size_t;
using Action = std::size_t;
using ParamIndex = std::size_t;

/// What the decision maker sees after acting: an observation symbol from the
/// alphabet of the acting (s, a) pair and the next state.
struct Observation {
  std::size_t symbol = 0;
  State next_state = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// One joint (symbol, next state) outcome of a state-action pair. The reward
/// is a deterministic function of (s, a, outcome).
struct Outcome {
  std::size_t symbol = 0;
  State next_state = 0;
  double reward = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/**
 * Outcome table of one state-action pair.
 *
 * The outcome list is shared by every parameter hypothesis; `probs` is a
 * row-major |params| x |outcomes| table holding nu_theta(symbol, next | s, a).
 * A pair without outcomes is infeasible.
 */
struct PairTable {
  std::vector<Outcome> outcomes;
  std::vector<double> probs;
};

/// Raw description of a model, validated by the PmdpModel constructor.
struct ModelData {
  std::string name;
  std::size_t num_states = 0;
  std::vector<std::string> action_names;
  std::vector<double> params;
  /// Indexed s * |actions| + a.
  std::vector<PairTable> pairs;
  /// Declared reward bound; zero means "derive from the outcome rewards".
  double reward_bound = 0.0;
  /// Optional |params| x |states| x |actions| mean-reward table. When present
  /// it must agree with the outcome-weighted rewards within 1e-9.
  std::vector<double> mean_reward;

  PairTable& pair(State s, Action a) { return pairs.at(s * action_names.size() + a); }

  /// Fills (s, a) from factored kernels: obs[theta][o] * trans[theta][s'].
  /// `symbol_rewards[o]` is the reward attached to observation symbol o.
  void set_factored(State s, Action a, const std::vector<std::vector<double>>& obs,
                    const std::vector<std::vector<double>>& trans,
                    const std::vector<double>& symbol_rewards);
};

/**
 * Finite parameterized MDP.
 *
 * For each hypothesis theta and feasible (s, a) the model carries the joint
 * law nu_theta(s, a) of (observation symbol, next state). The transition
 * kernel p_theta(s'|s,a) and observation kernel q_theta(o|s,a) are its
 * marginals; when the two are independent nu is exactly their product.
 *
 * Immutable after construction. The constructor rejects rows that are not
 * probability vectors (tolerance 1e-12), outcome supports that differ between
 * hypotheses, and mean rewards exceeding the declared bound.
 */
class PmdpModel {
 public:
  explicit PmdpModel(ModelData data);

  const std::string& name() const { return data_.name; }
  std::size_t num_states() const { return data_.num_states; }
  std::size_t num_actions() const { return data_.action_names.size(); }
  std::size_t num_params() const { return data_.params.size(); }
  double param_value(ParamIndex theta) const { return data_.params.at(theta); }
  const std::vector<double>& params() const { return data_.params; }
  const std::string& action_name(Action a) const { return data_.action_names.at(a); }
  std::optional<Action> find_action(const std::string& name) const;
  double reward_bound() const { return reward_bound_; }

  bool feasible(State s, Action a) const { return !pair(s, a).outcomes.empty(); }
  const std::vector<Action>& feasible_actions(State s) const { return feasible_.at(s); }

  std::span<const Outcome> outcomes(State s, Action a) const { return pair(s, a).outcomes; }
  std::span<const double> outcome_probs(ParamIndex theta, State s, Action a) const;
  std::span<const double> log_outcome_probs(ParamIndex theta, State s, Action a) const;

  /// Index of the outcome matching `obs` in outcomes(s, a), if any.
  std::optional<std::size_t> find_outcome(State s, Action a, const Observation& obs) const;

  /// nu_theta(obs.symbol, obs.next_state | s, a); zero for unknown outcomes.
  double joint_prob(ParamIndex theta, State s, Action a, const Observation& obs) const;
  double transition_prob(ParamIndex theta, State s, Action a, State next) const;
  double observation_prob(ParamIndex theta, State s, Action a, std::size_t symbol) const;
  /// One past the largest symbol used by (s, a).
  std::size_t alphabet_size(State s, Action a) const;

  double mean_reward(ParamIndex theta, State s, Action a) const {
    return mean_reward_[(theta * num_states() + s) * num_actions() + a];
  }

  /// True when nu_theta(s, a) is identical for all hypotheses (within 1e-12).
  bool update_invariant(State s, Action a) const {
    return invariant_[s * num_actions() + a] != 0;
  }

  const ModelData& data() const { return data_; }

 private:
  const PairTable& pair(State s, Action a) const {
    return data_.pairs[s * num_actions() + a];
  }

  ModelData data_;
  double reward_bound_ = 0.0;
  std::vector<std::vector<Action>> feasible_;
  std::vector<double> mean_reward_;
  std::vector<std::vector<double>> log_probs_;
  std::vector<char> invariant_;
};

}  // namespace pmdp
