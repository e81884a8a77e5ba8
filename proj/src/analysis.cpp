#include "pmdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pmdp/errors.hpp"
#include "pmdp/markov_chain.hpp"

namespace pmdp {

double kl_divergence(const PmdpModel& model, ParamIndex theta, ParamIndex other, State s, Action a) {
  if (!model.feasible(s, a)) throw InvalidArgument("KL divergence at an infeasible pair");
  const auto p = model.outcome_probs(theta, s, a);
  const auto q = model.outcome_probs(other, s, a);
  const auto log_p = model.log_outcome_probs(theta, s, a);
  const auto log_q = model.log_outcome_probs(other, s, a);
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) kl += p[j] * (log_p[j] - log_q[j]);
  }
  // Rounding can leave a tiny negative sum for near-identical laws.
  return std::max(kl, 0.0);
}

InformativeMap classify(const PmdpModel& model, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("classification threshold must be positive");
  const std::size_t n_s = model.num_states();
  const std::size_t n_a = model.num_actions();
  const std::size_t n_p = model.num_params();

  InformativeMap map;
  map.num_states = n_s;
  map.num_actions = n_a;
  map.epsilon = epsilon;
  map.kl_min.assign(n_s * n_a, 0.0);
  map.informative_flags.assign(n_s * n_a, 0);
  map.info_sets.resize(n_s);

  for (State s = 0; s < n_s; ++s) {
    for (Action a = 0; a < n_a; ++a) {
      if (!model.feasible(s, a)) continue;
      double kl_min = std::numeric_limits<double>::infinity();
      for (ParamIndex i = 0; i < n_p; ++i) {
        for (ParamIndex j = 0; j < n_p; ++j) {
          if (i != j) kl_min = std::min(kl_min, kl_divergence(model, i, j, s, a));
        }
      }
      map.kl_min[s * n_a + a] = kl_min;
      if (kl_min > epsilon) {
        map.informative_flags[s * n_a + a] = 1;
        map.info_sets[s].push_back(a);
      }
    }
  }
  return map;
}

bool AssumptionReport::assumption1_ok() const {
  return !unichain.empty() &&
         std::all_of(unichain.begin(), unichain.end(), [](const UnichainCheck& c) { return c.ok; });
}

AssumptionReport check_assumptions(const PmdpModel& model, std::span<const SolveResult> solutions,
                                   const InformativeMap& imap, std::optional<std::span<const Action>> mu_bar) {
  const std::size_t n_s = model.num_states();
  if (solutions.size() != model.num_params()) {
    throw InvalidArgument("check_assumptions needs one solution per parameter");
  }

  AssumptionReport report;
  for (ParamIndex k = 0; k < solutions.size(); ++k) {
    const ChainStructure cs = chain_structure(policy_transition_matrix(model, k, solutions[k].policy));
    report.unichain.push_back({k, cs.recurrent_classes.size(), cs.unichain()});
  }

  report.consistent_actions.resize(n_s);
  for (State s = 0; s < n_s; ++s) {
    auto& set = report.consistent_actions[s];
    bool all_informative = true;
    for (const SolveResult& sol : solutions) {
      set.push_back(sol.policy[s]);
      all_informative = all_informative && imap.informative(s, sol.policy[s]);
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (all_informative) report.qualifying_states.push_back(s);
  }
  if (!report.qualifying_states.empty()) report.s_star = report.qualifying_states.front();

  if (mu_bar) {
    MuBarReport mb;
    mb.policy.assign(mu_bar->begin(), mu_bar->end());
    mb.ergodic = true;
    for (ParamIndex k = 0; k < model.num_params(); ++k) {
      const Eigen::MatrixXd P = policy_transition_matrix(model, k, mb.policy);
      const ChainStructure cs = chain_structure(P);
      ErgodicityCheck check;
      check.theta = k;
      check.recurrent_classes = cs.recurrent_classes.size();
      check.irreducible = cs.irreducible();
      check.period = cs.irreducible() ? class_period(P, cs.recurrent_classes.front()) : 0;
      check.ergodic = check.irreducible && check.period == 1;
      mb.ergodic = mb.ergodic && check.ergodic;
      mb.chains.push_back(check);
    }
    if (report.s_star) mb.informative_at_s_star = imap.informative(*report.s_star, mb.policy[*report.s_star]);
    mb.consistent = true;
    for (State s = 0; s < n_s; ++s) {
      const auto& set = report.consistent_actions[s];
      mb.consistent = mb.consistent && std::binary_search(set.begin(), set.end(), mb.policy[s]);
    }
    report.mu_bar = std::move(mb);
  }
  return report;
}

namespace {

void print_actions(std::ostream& os, const PmdpModel& model, const std::vector<Action>& actions) {
  os << '{';
  for (std::size_t i = 0; i < actions.size(); ++i) os << (i ? ", " : "") << model.action_name(actions[i]);
  os << '}';
}

}  // namespace

void print_report(std::ostream& os, const PmdpModel& model, const AssumptionReport& report) {
  os << "model: " << model.name() << " (" << model.num_states() << " states, " << model.num_actions()
     << " actions, " << model.num_params() << " parameters)\n";

  os << "assumption 1 (optimal chains unichain): " << (report.assumption1_ok() ? "ok" : "FAILED") << '\n';
  for (const UnichainCheck& c : report.unichain) {
    os << "  theta=" << model.param_value(c.theta) << " recurrent classes=" << c.recurrent_classes
       << (c.ok ? "" : "  <- not unichain") << '\n';
  }

  os << "assumption 2 (informative optimal action at s*): " << (report.assumption2_ok() ? "ok" : "FAILED") << '\n';
  if (report.s_star) {
    os << "  s*=" << *report.s_star << "  qualifying states:";
    for (State s : report.qualifying_states) os << ' ' << s;
    os << '\n';
  }
  os << "  A*(s*)=";
  if (report.s_star) {
    print_actions(os, model, report.consistent_actions[*report.s_star]);
  } else {
    os << "n/a";
  }
  os << '\n';

  if (report.mu_bar) {
    const MuBarReport& mb = *report.mu_bar;
    os << "assumption 3 (mu_bar chain ergodic): " << (mb.ergodic ? "ok" : "FAILED") << '\n';
    for (const ErgodicityCheck& c : mb.chains) {
      os << "  theta=" << model.param_value(c.theta) << " irreducible=" << (c.irreducible ? "yes" : "no")
         << " period=" << c.period << '\n';
    }
    if (mb.informative_at_s_star) {
      os << "  mu_bar(s*) informative: " << (*mb.informative_at_s_star ? "yes" : "no") << '\n';
    }
    os << "  mu_bar consistent with the optimal policy set: " << (mb.consistent ? "yes" : "no") << '\n';
    os << "  note: the pathwise visit-count domination is not machine-checked\n";
  } else {
    os << "assumption 3: no mu_bar supplied\n";
  }
}

std::vector<std::size_t> informative_visits(const Trajectory& traj, const InformativeMap& imap,
                                            std::optional<State> s) {
  std::vector<std::size_t> counts(traj.length() + 1, 0);
  for (std::size_t t = 0; t < traj.length(); ++t) {
    const bool hit = s ? traj.states[t] == *s : imap.informative(traj.states[t], traj.actions[t]);
    counts[t + 1] = counts[t] + (hit ? 1 : 0);
  }
  return counts;
}

}  // namespace pmdp
