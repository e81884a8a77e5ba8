#include "pmdp/markov_chain.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

#include "pmdp/errors.hpp"

namespace pmdp {

Eigen::MatrixXd policy_transition_matrix(const PmdpModel& model, ParamIndex theta,
                                         std::span<const Action> policy) {
  const std::size_t n = model.num_states();
  if (policy.size() != n) throw InvalidArgument("policy must assign one action per state");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State s = 0; s < n; ++s) {
    const Action a = policy[s];
    if (a >= model.num_actions() || !model.feasible(s, a)) {
      throw InvalidArgument("policy picks an infeasible action at state " + std::to_string(s));
    }
    const auto outs = model.outcomes(s, a);
    const auto probs = model.outcome_probs(theta, s, a);
    for (std::size_t j = 0; j < outs.size(); ++j) {
      P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(outs[j].next_state)) += probs[j];
    }
  }
  return P;
}

ChainStructure chain_structure(const Eigen::MatrixXd& P) {
  const auto n = static_cast<std::size_t>(P.rows());
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) adj[i].push_back(j);
    }
  }

  // Tarjan's strongly connected components.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  int n_comp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }

  std::vector<bool> closed(static_cast<std::size_t>(n_comp), true);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : adj[v]) {
      if (comp[w] != comp[v]) closed[static_cast<std::size_t>(comp[v])] = false;
    }
  }

  ChainStructure out;
  out.transient.assign(n, true);
  std::vector<int> seen(static_cast<std::size_t>(n_comp), 0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto c = static_cast<std::size_t>(comp[v]);
    if (!closed[c] || seen[c]) continue;
    seen[c] = 1;
    std::vector<State> members;
    for (std::size_t w = 0; w < n; ++w) {
      if (comp[w] == comp[v]) {
        members.push_back(w);
        out.transient[w] = false;
      }
    }
    out.recurrent_classes.push_back(std::move(members));
  }
  return out;
}

std::size_t class_period(const Eigen::MatrixXd& P, std::span<const State> cls) {
  if (cls.empty()) return 0;
  const auto n = static_cast<std::size_t>(P.rows());
  std::vector<bool> member(n, false);
  for (State s : cls) member[s] = true;

  // BFS levels from one state; the period is the gcd of level(u) + 1 - level(v)
  // over every edge u -> v inside the class.
  std::vector<long> level(n, -1);
  std::queue<State> frontier;
  level[cls.front()] = 0;
  frontier.push(cls.front());
  std::size_t g = 0;
  while (!frontier.empty()) {
    const State u = frontier.front();
    frontier.pop();
    for (State v = 0; v < n; ++v) {
      if (!member[v] || !(P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0)) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      } else {
        const long diff = level[u] + 1 - level[v];
        g = std::gcd(g, static_cast<std::size_t>(diff < 0 ? -diff : diff));
      }
    }
  }
  return g;
}

bool is_ergodic(const Eigen::MatrixXd& P) {
  const ChainStructure cs = chain_structure(P);
  return cs.irreducible() && class_period(P, cs.recurrent_classes.front()) == 1;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  const ChainStructure cs = chain_structure(P);
  if (!cs.unichain()) {
    throw Multichain("chain has " + std::to_string(cs.recurrent_classes.size()) + " recurrent classes");
  }
  const auto& cls = cs.recurrent_classes.front();
  const auto m = static_cast<Eigen::Index>(cls.size());

  // d (P_CC - I) = 0 with the last balance equation replaced by sum(d) = 1.
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(j, i) = P(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(i)]),
                  static_cast<Eigen::Index>(cls[static_cast<std::size_t>(j)])) - (i == j ? 1.0 : 0.0);
    }
  }
  A.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  const Eigen::VectorXd d_cls = A.fullPivLu().solve(rhs);

  Eigen::VectorXd d = Eigen::VectorXd::Zero(P.rows());
  for (Eigen::Index i = 0; i < m; ++i) d(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(i)])) = d_cls(i);
  return d;
}

}  // namespace pmdp
