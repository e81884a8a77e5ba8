#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pmdp/model.hpp"

namespace pmdp::envs {

inline constexpr double kDefaultTailMass = 1e-12;

/// Single-server admission control with a Bernoulli arrival per epoch.
struct AdmissionParams {
  std::size_t capacity = 40;
  double toll = 10.0;
  double holding = 0.15;
  double service = 0.3;
  std::vector<double> thetas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

/// Single-good lost-sales inventory with full restocking and censored Poisson demand.
struct InventoryParams {
  std::size_t capacity = 30;
  double cost = 2.0;
  double price = 2.8;
  double holding = 0.01;
  std::vector<double> thetas{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double tail_mass = kDefaultTailMass;
};

/// Posted-price queue where arriving customers join or balk.
struct PricingParams {
  double value = 4.0;
  double wait_cost = 0.05;
  double service = 0.5;
  double holding = 0.01;
  std::vector<double> prices{0, 1, 2, 3, 4, 5};
  std::vector<double> thetas{1, 2, 3, 4, 5};
  double tail_mass = kDefaultTailMass;
};

inline constexpr Action kOpen = 0;
inline constexpr Action kClose = 1;
inline constexpr Action kRestock = 0;
inline constexpr Action kHold = 1;

/**
 * Poisson mass functions truncated at a common support 0..K for all means,
 * where K is the smallest value with P(D > K) < tail_mass under the largest
 * mean. Each row is renormalized. Returns one row per mean.
 */
std::vector<std::vector<double>> truncated_poisson(const std::vector<double>& means, double tail_mass);

/// Upper-tail mass P(D > k) of an untruncated Poisson(mean).
double poisson_upper_tail(double mean, std::size_t k);

/**
 * Admission control. States 0..capacity, actions {open, close}. Each epoch
 * an arrival (probability theta) is admitted when open and not full, paying
 * the toll; then one customer finishes service with probability `service`
 * if the queue is nonempty. Symbols encode 2 * admitted + served. Blocked or
 * closed arrivals are not observed. Reward = toll * admitted - holding * s.
 */
PmdpModel admission_model(const AdmissionParams& params);

/**
 * Inventory control. States 0..capacity (stock at epoch start), actions
 * {restock, hold}. Sales y = min(D, k) are observed, with y = k aggregating
 * the censored tail P(D >= k). Reward = price * y - cost * reorder - holding * (k - y).
 */
PmdpModel inventory_model(const InventoryParams& params);

/// Number of customers the queue admits at a posted price: a customer
/// arriving to queue length n joins iff value - (wait_cost / service)(n + 1) >= price.
std::size_t join_capacity(const PricingParams& params, double price);

/// min{ n >= 0 : value - (wait_cost / service)(n + 1) < lowest price }.
std::size_t effective_capacity(const PricingParams& params);

/**
 * Dynamic pricing. States 0..effective_capacity, one action per price.
 * Poisson arrivals join sequentially while the queue is below the price's
 * join capacity; the number of joins J is observed (censored at saturation).
 * Reward = price * J - holding * n. After joins one customer departs with
 * probability `service` if the queue is nonempty.
 */
PmdpModel pricing_model(const PricingParams& params);

/// "Always admit unless full".
std::vector<Action> admission_mu_bar(const PmdpModel& model);
/// "Always restock".
std::vector<Action> inventory_mu_bar(const PmdpModel& model);
/// "Always post the lowest price".
std::vector<Action> pricing_mu_bar(const PmdpModel& model);

/// Builds one of the named environments ("admission", "inventory", "pricing")
/// from key=value overrides; unknown keys throw InvalidArgument.
PmdpModel build_env(const std::string& env, const std::vector<std::string>& overrides = {});

/// The reference policy of a named environment.
std::vector<Action> env_mu_bar(const std::string& env, const PmdpModel& model);

}  // namespace pmdp::envs
