#include "pmdp/thompson.hpp"

#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "pmdp/errors.hpp"
#include "pmdp/model_io.hpp"

namespace pmdp {

PolicyCache build_policy_cache(const PmdpModel& model, const RviOptions& opts, std::size_t workers) {
  const std::size_t n = model.num_params();
  PolicyCache cache;
  cache.model_hash = model_hash(model);
  cache.solutions.resize(n);

  std::vector<std::exception_ptr> errors(n);
  auto solve = [&](ParamIndex k) {
    try {
      cache.solutions[k] = relative_value_iteration(model, k, opts);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (ParamIndex k = 0; k < n; ++k) solve(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&, w] {
        for (ParamIndex k = w; k < n; k += workers) solve(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return cache;
}

void validate_cache(const PolicyCache& cache, const PmdpModel& model) {
  if (cache.solutions.size() != model.num_params()) {
    throw InvalidArgument("policy cache does not cover every parameter");
  }
  for (const SolveResult& sol : cache.solutions) {
    if (sol.policy.size() != model.num_states()) throw InvalidArgument("policy cache has the wrong state count");
  }
  if (cache.model_hash != model_hash(model)) {
    throw InvalidArgument("policy cache was built for a different model");
  }
}

void save_policy_cache(const std::filesystem::path& path, const PolicyCache& cache) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "pmdp-policy-cache 1\n";
  os << "model_hash " << hash_hex(cache.model_hash) << '\n';
  os << "params " << cache.solutions.size() << '\n';
  for (std::size_t k = 0; k < cache.solutions.size(); ++k) {
    const SolveResult& sol = cache.solutions[k];
    os << "solution " << k << " gain " << format_double(sol.gain) << " iterations " << sol.iterations
       << " residual " << format_double(sol.residual) << " damped " << (sol.damped ? 1 : 0) << '\n';
    os << "policy";
    for (Action a : sol.policy) os << ' ' << a;
    os << "\nbias";
    for (double b : sol.bias) os << ' ' << format_double(b);
    os << '\n';
  }
  os << "end\n";
  if (!os) throw IoError("failed writing " + path.string());
}

PolicyCache load_policy_cache(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  auto fail = [&](const std::string& what) -> void {
    throw ParseError("policy cache " + path.string() + ": " + what);
  };

  std::string key, version;
  is >> key >> version;
  if (key != "pmdp-policy-cache" || version != "1") fail("bad header");
  PolicyCache cache;
  std::string hex;
  is >> key >> hex;
  if (key != "model_hash") fail("missing model_hash");
  cache.model_hash = std::stoull(hex, nullptr, 16);
  std::size_t n = 0;
  is >> key >> n;
  if (key != "params") fail("missing params");
  cache.solutions.resize(n);

  std::string line;
  std::getline(is, line);
  for (std::size_t k = 0; k < n; ++k) {
    SolveResult& sol = cache.solutions[k];
    std::getline(is, line);
    std::istringstream head(line);
    std::string tag, gain, residual;
    std::size_t idx = 0;
    int damped = 0;
    std::string g_key, i_key, r_key, d_key;
    head >> tag >> idx >> g_key >> gain >> i_key >> sol.iterations >> r_key >> residual >> d_key >> damped;
    if (!head || tag != "solution" || idx != k) fail("bad solution header");
    sol.gain = parse_double(gain);
    sol.residual = parse_double(residual);
    sol.damped = damped != 0;

    std::getline(is, line);
    std::istringstream pol(line);
    pol >> tag;
    if (tag != "policy") fail("missing policy line");
    for (Action a; pol >> a;) sol.policy.push_back(a);

    std::getline(is, line);
    std::istringstream bias(line);
    bias >> tag;
    if (tag != "bias") fail("missing bias line");
    for (std::string tok; bias >> tok;) sol.bias.push_back(parse_double(tok));
  }
  std::getline(is, line);
  if (line != "end") fail("missing end marker");
  return cache;
}

PolicyCache load_or_build_policy_cache(const std::filesystem::path& path, const PmdpModel& model,
                                       const RviOptions& opts, std::size_t workers) {
  if (std::filesystem::exists(path)) {
    try {
      PolicyCache cache = load_policy_cache(path);
      validate_cache(cache, model);
      return cache;
    } catch (const Error&) {
      // Stale or unreadable cache: fall through and rebuild it.
    }
  }
  PolicyCache cache = build_policy_cache(model, opts, workers);
  save_policy_cache(path, cache);
  return cache;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index + 1));
}

Trajectory run_path(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true,
                    const Posterior& prior, std::size_t horizon, std::uint64_t seed, State initial_state) {
  const std::size_t n_p = model.num_params();
  if (horizon == 0) throw InvalidArgument("horizon must be at least 1");
  if (theta_true >= n_p) throw InvalidArgument("true parameter index out of range");
  if (prior.size() != n_p) throw InvalidArgument("prior size does not match the model");
  if (initial_state >= model.num_states()) throw InvalidArgument("initial state out of range");
  if (cache.solutions.size() != n_p) throw InvalidArgument("policy cache does not cover every parameter");

  Trajectory tr;
  tr.seed = seed;
  tr.theta_true = theta_true;
  tr.states.reserve(horizon);
  tr.actions.reserve(horizon);
  tr.observations.reserve(horizon);
  tr.rewards.reserve(horizon);
  tr.sampled_params.reserve(horizon);
  tr.posterior_error.reserve(horizon + 1);

  std::vector<double> logw(prior.log_weights().begin(), prior.log_weights().end());
  std::vector<double> probs = prior.probabilities();
  auto error = [&] {
    double err = 0.0;
    for (ParamIndex k = 0; k < n_p; ++k) {
      if (k != theta_true) err += probs[k];
    }
    return std::min(err, 1.0);
  };

  Rng rng(seed);
  State s = initial_state;
  tr.posterior_error.push_back(error());
  for (std::size_t t = 0; t < horizon; ++t) {
    const ParamIndex sampled = sample_index(probs, uniform01(rng));
    const Action a = cache.action(sampled, s);
    const std::size_t j = sample_index(model.outcome_probs(theta_true, s, a), uniform01(rng));
    const Outcome& out = model.outcomes(s, a)[j];
    update_log_weights(logw, probs, model, s, a, j);

    tr.states.push_back(s);
    tr.actions.push_back(a);
    tr.observations.push_back({out.symbol, out.next_state});
    tr.rewards.push_back(out.reward);
    tr.sampled_params.push_back(sampled);
    tr.posterior_error.push_back(error());
    s = out.next_state;
  }
  return tr;
}

double regret_increment(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true, State s,
                        Action a) {
  return cache.gain(theta_true) - model.mean_reward(theta_true, s, a);
}

double bellman_gap(const PmdpModel& model, const PolicyCache& cache, ParamIndex theta_true, State s, Action a) {
  const std::vector<double>& h = cache.solutions[theta_true].bias;
  const auto outs = model.outcomes(s, a);
  const auto probs = model.outcome_probs(theta_true, s, a);
  double expected_next = 0.0;
  for (std::size_t j = 0; j < outs.size(); ++j) expected_next += probs[j] * h[outs[j].next_state];
  return regret_increment(model, cache, theta_true, s, a) + h[s] - expected_next;
}

}  // namespace pmdp
