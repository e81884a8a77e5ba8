#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmdp/model.hpp"

namespace pmdp {

/// Dense transition matrix of the chain induced by a stationary policy under theta.
Eigen::MatrixXd policy_transition_matrix(const PmdpModel& model, ParamIndex theta,
                                         std::span<const Action> policy);

/// Communicating-class structure of a finite chain (edges are entries > 0).
struct ChainStructure {
  /// Closed communicating classes, each sorted, ordered by smallest member.
  std::vector<std::vector<State>> recurrent_classes;
  /// True for states outside every recurrent class.
  std::vector<bool> transient;

  bool unichain() const { return recurrent_classes.size() == 1; }
  bool irreducible() const {
    return unichain() && recurrent_classes.front().size() == transient.size();
  }
};

ChainStructure chain_structure(const Eigen::MatrixXd& P);

/// Period of a communicating class: gcd of cycle lengths through its states.
std::size_t class_period(const Eigen::MatrixXd& P, std::span<const State> cls);

/// Irreducible and aperiodic.
bool is_ergodic(const Eigen::MatrixXd& P);

/// Stationary distribution of a unichain chain; zero on transient states.
/// Throws Multichain when more than one recurrent class exists.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);

}  // namespace pmdp
