#include "pmdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmdp/errors.hpp"
#include "pmdp/markov_chain.hpp"

namespace pmdp {

namespace {

constexpr double kTieTol = 1e-12;

struct Transition {
  State next;
  double prob;
};

// Marginal transition rows of every feasible pair under one hypothesis.
struct DenseKernel {
  std::vector<std::vector<Transition>> rows;  // indexed s * |A| + a
  std::vector<double> reward;                 // indexed s * |A| + a
};

DenseKernel marginal_kernel(const PmdpModel& model, ParamIndex theta) {
  const std::size_t n_s = model.num_states();
  const std::size_t n_a = model.num_actions();
  DenseKernel k;
  k.rows.resize(n_s * n_a);
  k.reward.assign(n_s * n_a, 0.0);
  std::vector<double> scratch(n_s, 0.0);
  for (State s = 0; s < n_s; ++s) {
    for (Action a : model.feasible_actions(s)) {
      const auto outs = model.outcomes(s, a);
      const auto probs = model.outcome_probs(theta, s, a);
      for (std::size_t j = 0; j < outs.size(); ++j) scratch[outs[j].next_state] += probs[j];
      auto& row = k.rows[s * n_a + a];
      for (State next = 0; next < n_s; ++next) {
        if (scratch[next] > 0.0) row.push_back({next, scratch[next]});
        scratch[next] = 0.0;
      }
      k.reward[s * n_a + a] = model.mean_reward(theta, s, a);
    }
  }
  return k;
}

}  // namespace

SolveResult relative_value_iteration(const PmdpModel& model, ParamIndex theta, const RviOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("RVI tolerance must be positive");
  if (!(opts.damping > 0.0 && opts.damping < 1.0)) throw InvalidArgument("RVI damping must lie in (0, 1)");
  if (theta >= model.num_params()) throw InvalidArgument("parameter index out of range");

  const std::size_t n_s = model.num_states();
  const std::size_t n_a = model.num_actions();
  const DenseKernel kernel = marginal_kernel(model, theta);

  std::vector<double> h(n_s, 0.0);
  std::vector<double> th(n_s, 0.0);
  std::vector<Action> policy(n_s, 0);
  bool damped = false;
  double stall_ref = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (State s = 0; s < n_s; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      Action best_a = 0;
      for (Action a : model.feasible_actions(s)) {
        double q = kernel.reward[s * n_a + a];
        for (const Transition& t : kernel.rows[s * n_a + a]) q += t.prob * h[t.next];
        if (q > best + kTieTol * (1.0 + std::abs(best)) || best == -std::numeric_limits<double>::infinity()) {
          best = q;
          best_a = a;
        }
      }
      th[s] = best;
      policy[s] = best_a;
      const double diff = best - h[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    const double span = hi - lo;
    if (span <= opts.tol) {
      SolveResult out;
      out.policy = std::move(policy);
      out.gain = 0.5 * (lo + hi);
      out.bias = std::move(h);
      out.iterations = iter;
      out.residual = span;
      out.damped = damped;
      return out;
    }

    if (!damped && iter % opts.stall_window == 0) {
      if (span >= stall_ref) damped = true;
      stall_ref = span;
    }

    const double anchor = damped ? (1.0 - opts.damping) * h[kReferenceState] + opts.damping * th[kReferenceState]
                                 : th[kReferenceState];
    for (State s = 0; s < n_s; ++s) {
      const double next = damped ? (1.0 - opts.damping) * h[s] + opts.damping * th[s] : th[s];
      h[s] = next - anchor;
    }
    h[kReferenceState] = 0.0;
  }

  std::ostringstream os;
  os << "relative value iteration did not converge for theta index " << theta << " within "
     << opts.max_iter << " iterations";
  throw NoConvergence(os.str());
}

double policy_gain(const PmdpModel& model, ParamIndex theta, std::span<const Action> policy) {
  const Eigen::MatrixXd P = policy_transition_matrix(model, theta, policy);
  const Eigen::VectorXd d = stationary_distribution(P);
  double gain = 0.0;
  for (State s = 0; s < model.num_states(); ++s) {
    gain += d(static_cast<Eigen::Index>(s)) * model.mean_reward(theta, s, policy[s]);
  }
  return gain;
}

}  // namespace pmdp
