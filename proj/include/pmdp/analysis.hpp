#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pmdp/model.hpp"
#include "pmdp/solver.hpp"
#include "pmdp/trajectory.hpp"

namespace pmdp {

/// D(nu_theta(s,a) || nu_other(s,a)) over joint (symbol, next state)
/// outcomes, with 0 log(0/0) = 0.
double kl_divergence(const PmdpModel& model, ParamIndex theta, ParamIndex other, State s, Action a);

inline constexpr double kDefaultInformativeEpsilon = 1e-9;

/**
 * Informative / uninformative partition of the state-action space.
 *
 * kl_min(s, a) is the smallest divergence over ordered pairs of distinct
 * hypotheses; (s, a) is informative iff kl_min > epsilon. With a single
 * hypothesis every kl_min is +inf and every feasible pair is informative.
 * Infeasible pairs carry kl_min = 0 and are never informative.
 */
struct InformativeMap {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  double epsilon = kDefaultInformativeEpsilon;
  std::vector<double> kl_min;
  std::vector<char> informative_flags;
  /// I(s): informative actions per state, ascending.
  std::vector<std::vector<Action>> info_sets;

  double kl(State s, Action a) const { return kl_min.at(s * num_actions + a); }
  bool informative(State s, Action a) const { return informative_flags.at(s * num_actions + a) != 0; }
};

InformativeMap classify(const PmdpModel& model, double epsilon = kDefaultInformativeEpsilon);

struct UnichainCheck {
  ParamIndex theta = 0;
  std::size_t recurrent_classes = 0;
  bool ok = false;
};

struct ErgodicityCheck {
  ParamIndex theta = 0;
  std::size_t recurrent_classes = 0;
  bool irreducible = false;
  std::size_t period = 0;
  bool ergodic = false;
};

/// Diagnostics for a candidate reference policy mu_bar.
struct MuBarReport {
  std::vector<Action> policy;
  /// Chain under every hypothesis.
  std::vector<ErgodicityCheck> chains;
  bool ergodic = false;
  /// mu_bar(s_star) is informative at s_star.
  std::optional<bool> informative_at_s_star;
  /// mu_bar(s) lies in A*(s) for every state.
  bool consistent = false;
};

struct AssumptionReport {
  std::vector<UnichainCheck> unichain;
  /// Lowest state whose optimal action is informative for every hypothesis.
  std::optional<State> s_star;
  std::vector<State> qualifying_states;
  /// A*(s) = { mu*_theta(s) : theta }.
  std::vector<std::vector<Action>> consistent_actions;
  std::optional<MuBarReport> mu_bar;

  bool assumption1_ok() const;
  bool assumption2_ok() const { return s_star.has_value(); }
  bool assumption3_ok() const { return mu_bar && mu_bar->ergodic; }
};

/// Requires one SolveResult per hypothesis, in parameter order.
AssumptionReport check_assumptions(const PmdpModel& model, std::span<const SolveResult> solutions,
                                   const InformativeMap& imap,
                                   std::optional<std::span<const Action>> mu_bar = std::nullopt);

void print_report(std::ostream& os, const PmdpModel& model, const AssumptionReport& report);

/**
 * Prefix counters over a trajectory, length T + 1 with entry t covering
 * epochs 0 .. t-1. Without `s`: steps whose action is informative in the
 * current state. With `s`: visits to s.
 */
std::vector<std::size_t> informative_visits(const Trajectory& traj, const InformativeMap& imap,
                                            std::optional<State> s = std::nullopt);

}  // namespace pmdp
