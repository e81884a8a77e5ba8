#include "pmdp/envs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "pmdp/errors.hpp"

namespace pmdp::envs {

namespace {

// Slack on the join rule so that prices sitting exactly on a threshold
// (e.g. 4 - 0.1 * 10 >= 3) are not lost to rounding.
constexpr double kJoinSlack = 1e-9;

double log_poisson_pmf(double mean, std::size_t k) {
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// Joint probabilities of a censored count min(D, cap) given a truncated pmf.
std::vector<double> censored_counts(const std::vector<double>& pmf, std::size_t cap) {
  const std::size_t top = std::min(cap, pmf.size() - 1);
  std::vector<double> out(top + 1, 0.0);
  for (std::size_t d = 0; d < pmf.size(); ++d) out[std::min(d, top)] += pmf[d];
  return out;
}

void validate_thetas(const std::vector<double>& thetas, bool unit_interval) {
  require(!thetas.empty(), "parameter set must not be empty");
  for (double t : thetas) {
    if (unit_interval) {
      require(t > 0.0 && t < 1.0, "arrival probabilities must lie in (0, 1)");
    } else {
      require(t > 0.0 && std::isfinite(t), "Poisson means must be positive");
    }
  }
}

}  // namespace

double poisson_upper_tail(double mean, std::size_t k) {
  // Sum the pmf beyond k until the terms stop mattering.
  double tail = 0.0;
  for (std::size_t j = k + 1;; ++j) {
    const double term = std::exp(log_poisson_pmf(mean, j));
    tail += term;
    if (static_cast<double>(j) > mean && term < 1e-300 + tail * 1e-17) break;
  }
  return tail;
}

std::vector<std::vector<double>> truncated_poisson(const std::vector<double>& means, double tail_mass) {
  require(!means.empty(), "truncated_poisson needs at least one mean");
  require(tail_mass > 0.0 && tail_mass < 1.0, "tail mass must lie in (0, 1)");
  const double largest = *std::max_element(means.begin(), means.end());
  std::size_t support = 0;
  while (poisson_upper_tail(largest, support) >= tail_mass) ++support;

  std::vector<std::vector<double>> rows;
  rows.reserve(means.size());
  for (double mean : means) {
    std::vector<double> row(support + 1);
    for (std::size_t k = 0; k <= support; ++k) row[k] = std::exp(log_poisson_pmf(mean, k));
    double sum = 0.0;
    for (double p : row) sum += p;
    for (double& p : row) p /= sum;
    rows.push_back(std::move(row));
  }
  return rows;
}

PmdpModel admission_model(const AdmissionParams& params) {
  require(params.capacity > 0, "admission capacity must be positive");
  require(params.service > 0.0 && params.service < 1.0, "service probability must lie in (0, 1)");
  require(params.toll >= 0.0 && params.holding >= 0.0, "toll and holding cost must be nonnegative");
  validate_thetas(params.thetas, true);

  const std::size_t n_states = params.capacity + 1;
  const double beta = params.service;
  ModelData data;
  data.name = "admission";
  data.num_states = n_states;
  data.action_names = {"open", "close"};
  data.params = params.thetas;
  data.pairs.resize(n_states * 2);

  for (State s = 0; s < n_states; ++s) {
    for (Action a : {kOpen, kClose}) {
      const bool accepts = a == kOpen && s < params.capacity;
      PairTable& table = data.pair(s, a);
      // (admitted, served) combinations reachable from s.
      for (int admitted = 0; admitted <= (accepts ? 1 : 0); ++admitted) {
        const std::size_t queue = s + static_cast<std::size_t>(admitted);
        for (int served = 0; served <= (queue > 0 ? 1 : 0); ++served) {
          table.outcomes.push_back({static_cast<std::size_t>(2 * admitted + served),
                                    queue - static_cast<std::size_t>(served),
                                    params.toll * admitted - params.holding * static_cast<double>(s)});
        }
      }
      for (double theta : params.thetas) {
        for (const Outcome& out : table.outcomes) {
          const int admitted = static_cast<int>(out.symbol / 2);
          const int served = static_cast<int>(out.symbol % 2);
          const std::size_t queue = s + static_cast<std::size_t>(admitted);
          double p = accepts ? (admitted ? theta : 1.0 - theta) : 1.0;
          if (queue > 0) p *= served ? beta : 1.0 - beta;
          table.probs.push_back(p);
        }
      }
    }
  }
  return PmdpModel(std::move(data));
}

PmdpModel inventory_model(const InventoryParams& params) {
  require(params.capacity > 0, "inventory capacity must be positive");
  require(params.cost > 0.0 && params.price > params.cost, "need price > cost > 0");
  require(params.holding >= 0.0, "holding cost must be nonnegative");
  validate_thetas(params.thetas, false);

  const auto pmf = truncated_poisson(params.thetas, params.tail_mass);
  const std::size_t n_states = params.capacity + 1;
  ModelData data;
  data.name = "inventory";
  data.num_states = n_states;
  data.action_names = {"restock", "hold"};
  data.params = params.thetas;
  data.pairs.resize(n_states * 2);

  for (State s = 0; s < n_states; ++s) {
    for (Action a : {kRestock, kHold}) {
      const std::size_t stock = a == kRestock ? params.capacity : s;
      const double reorder = static_cast<double>(stock - s);
      PairTable& table = data.pair(s, a);
      const std::size_t top = std::min(stock, pmf.front().size() - 1);
      for (std::size_t y = 0; y <= top; ++y) {
        const double leftover = static_cast<double>(stock - y);
        table.outcomes.push_back({y, stock - y,
                                  params.price * static_cast<double>(y) - params.cost * reorder -
                                      params.holding * leftover});
      }
      for (const auto& row : pmf) {
        const auto sales = censored_counts(row, stock);
        table.probs.insert(table.probs.end(), sales.begin(), sales.end());
      }
    }
  }
  return PmdpModel(std::move(data));
}

std::size_t join_capacity(const PricingParams& params, double price) {
  const double per_customer = params.wait_cost / params.service;
  std::size_t cap = 0;
  while (params.value - per_customer * static_cast<double>(cap + 1) >= price - kJoinSlack) ++cap;
  return cap;
}

std::size_t effective_capacity(const PricingParams& params) {
  return join_capacity(params, params.prices.front());
}

PmdpModel pricing_model(const PricingParams& params) {
  require(params.service > 0.0 && params.service < 1.0, "service probability must lie in (0, 1)");
  require(params.wait_cost > 0.0 && params.value > 0.0, "value and waiting cost must be positive");
  require(params.holding >= 0.0, "holding cost must be nonnegative");
  require(!params.prices.empty(), "price ladder must not be empty");
  for (std::size_t i = 1; i < params.prices.size(); ++i) {
    require(params.prices[i] > params.prices[i - 1], "price ladder must be strictly increasing");
  }
  const double threshold = params.value - params.wait_cost / params.service;
  require(params.prices.back() > threshold, "highest price must exceed value - wait_cost / service");
  require(params.prices.front() <= threshold, "lowest price must not exceed value - wait_cost / service");
  validate_thetas(params.thetas, false);

  const auto pmf = truncated_poisson(params.thetas, params.tail_mass);
  const std::size_t n_bar = effective_capacity(params);
  const std::size_t n_states = n_bar + 1;
  const double beta = params.service;

  ModelData data;
  data.name = "pricing";
  data.num_states = n_states;
  for (double p : params.prices) data.action_names.push_back("price=" + format_number(p));
  data.params = params.thetas;
  data.pairs.resize(n_states * params.prices.size());

  for (State n = 0; n < n_states; ++n) {
    for (Action a = 0; a < params.prices.size(); ++a) {
      const double price = params.prices[a];
      const std::size_t cap = join_capacity(params, price);
      const std::size_t room = cap > n ? cap - n : 0;
      PairTable& table = data.pair(n, a);
      const std::size_t top = std::min(room, pmf.front().size() - 1);
      for (std::size_t j = 0; j <= top; ++j) {
        const std::size_t queue = n + j;
        const double reward = price * static_cast<double>(j) - params.holding * static_cast<double>(n);
        table.outcomes.push_back({j, queue, reward});
        if (queue > 0) table.outcomes.push_back({j, queue - 1, reward});
      }
      for (const auto& row : pmf) {
        const auto joins = censored_counts(row, room);
        for (const Outcome& out : table.outcomes) {
          const std::size_t queue = n + out.symbol;
          const double served = queue == 0 ? 1.0 : (out.next_state < queue ? beta : 1.0 - beta);
          table.probs.push_back(joins[out.symbol] * served);
        }
      }
    }
  }
  return PmdpModel(std::move(data));
}

std::vector<Action> admission_mu_bar(const PmdpModel& model) {
  std::vector<Action> mu(model.num_states(), kOpen);
  mu.back() = kClose;
  return mu;
}

std::vector<Action> inventory_mu_bar(const PmdpModel& model) {
  return std::vector<Action>(model.num_states(), kRestock);
}

std::vector<Action> pricing_mu_bar(const PmdpModel& model) {
  return std::vector<Action>(model.num_states(), 0);
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("bad number for '" + key + "': " + text);
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("bad count for '" + key + "': " + text);
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw InvalidArgument("empty list for '" + key + "'");
  return out;
}

std::map<std::string, std::string> split_overrides(const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

}  // namespace

PmdpModel build_env(const std::string& env, const std::vector<std::string>& overrides) {
  const auto kv = split_overrides(overrides);
  auto unknown = [&](const std::string& key) {
    throw InvalidArgument("unknown parameter '" + key + "' for environment " + env);
  };

  if (env == "admission") {
    AdmissionParams p;
    for (const auto& [k, v] : kv) {
      if (k == "capacity") p.capacity = parse_count(k, v);
      else if (k == "toll") p.toll = parse_double(k, v);
      else if (k == "holding") p.holding = parse_double(k, v);
      else if (k == "service") p.service = parse_double(k, v);
      else if (k == "thetas") p.thetas = parse_list(k, v);
      else unknown(k);
    }
    return admission_model(p);
  }
  if (env == "inventory") {
    InventoryParams p;
    for (const auto& [k, v] : kv) {
      if (k == "capacity") p.capacity = parse_count(k, v);
      else if (k == "cost") p.cost = parse_double(k, v);
      else if (k == "price") p.price = parse_double(k, v);
      else if (k == "holding") p.holding = parse_double(k, v);
      else if (k == "thetas") p.thetas = parse_list(k, v);
      else if (k == "tail") p.tail_mass = parse_double(k, v);
      else unknown(k);
    }
    return inventory_model(p);
  }
  if (env == "pricing") {
    PricingParams p;
    for (const auto& [k, v] : kv) {
      if (k == "value") p.value = parse_double(k, v);
      else if (k == "wait_cost") p.wait_cost = parse_double(k, v);
      else if (k == "service") p.service = parse_double(k, v);
      else if (k == "holding") p.holding = parse_double(k, v);
      else if (k == "prices") p.prices = parse_list(k, v);
      else if (k == "thetas") p.thetas = parse_list(k, v);
      else if (k == "tail") p.tail_mass = parse_double(k, v);
      else unknown(k);
    }
    return pricing_model(p);
  }
  throw InvalidArgument("unknown environment '" + env + "' (expected admission, inventory or pricing)");
}

std::vector<Action> env_mu_bar(const std::string& env, const PmdpModel& model) {
  if (env == "admission") return admission_mu_bar(model);
  if (env == "inventory") return inventory_mu_bar(model);
  if (env == "pricing") return pricing_mu_bar(model);
  throw InvalidArgument("unknown environment '" + env + "'");
}

}  // namespace pmdp::envs
