#pragma once

#include <cstdint>
#include <vector>

#include "pmdp/model.hpp"

namespace pmdp {

/// One Thompson-sampling sample path of length T.
struct Trajectory {
  /// S_0 .. S_{T-1}; the final state is observations.back().next_state.
  std::vector<State> states;
  std::vector<Action> actions;
  std::vector<Observation> observations;
  /// Realized rewards r(s, a, outcome).
  std::vector<double> rewards;
  std::vector<ParamIndex> sampled_params;
  /// 1 - pi_t(theta_true) for t = 0 .. T.
  std::vector<double> posterior_error;
  std::uint64_t seed = 0;
  ParamIndex theta_true = 0;

  std::size_t length() const { return states.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace pmdp
