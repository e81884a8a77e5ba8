// pmdp-ts: build benchmark models, check the learning assumptions, and run
// Thompson-sampling experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmdp/analysis.hpp"
#include "pmdp/envs.hpp"
#include "pmdp/errors.hpp"
#include "pmdp/harness.hpp"
#include "pmdp/model_io.hpp"
#include "pmdp/thompson.hpp"

namespace fs = std::filesystem;
using namespace pmdp;

namespace {

std::vector<Action> read_policy_file(const fs::path& path, const PmdpModel& model) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<Action> policy;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    for (std::string tok; ss >> tok;) {
      if (const auto named = model.find_action(tok)) {
        policy.push_back(*named);
      } else {
        try {
          policy.push_back(std::stoul(tok));
        } catch (const std::exception&) {
          throw ParseError("unknown action '" + tok + "' in " + path.string());
        }
      }
    }
  }
  if (policy.size() != model.num_states()) {
    throw ParseError(path.string() + " lists " + std::to_string(policy.size()) + " actions for " +
                     std::to_string(model.num_states()) + " states");
  }
  return policy;
}

std::vector<ParamIndex> resolve_thetas(const PmdpModel& model, const std::string& spec) {
  std::vector<ParamIndex> out;
  if (spec == "all") {
    for (ParamIndex k = 0; k < model.num_params(); ++k) out.push_back(k);
    return out;
  }
  const double value = parse_double(spec);
  for (ParamIndex k = 0; k < model.num_params(); ++k) {
    if (std::abs(model.param_value(k) - value) <= 1e-9 * std::max(1.0, std::abs(value))) return {k};
  }
  throw InvalidArgument("theta " + spec + " is not in the model's parameter set");
}

int cmd_build(const std::string& env, const std::vector<std::string>& params, const fs::path& out) {
  const PmdpModel model = envs::build_env(env, params);
  save_model(out, model);
  std::cout << "wrote " << out.string() << " (" << model.num_states() << " states, " << model.num_actions()
            << " actions, " << model.num_params() << " parameters, hash " << hash_hex(model_hash(model)) << ")\n";
  return 0;
}

int cmd_check(const std::optional<fs::path>& model_path, const std::optional<std::string>& env,
              const std::optional<fs::path>& mu_bar_path) {
  const PmdpModel model = model_path ? load_model(*model_path) : envs::build_env(env.value_or("admission"));
  const PolicyCache cache = build_policy_cache(model);
  const InformativeMap imap = classify(model);
  std::optional<std::vector<Action>> mu_bar;
  if (mu_bar_path) mu_bar = read_policy_file(*mu_bar_path, model);

  const AssumptionReport report =
      mu_bar ? check_assumptions(model, cache.solutions, imap, std::span<const Action>(*mu_bar))
             : check_assumptions(model, cache.solutions, imap);
  print_report(std::cout, model, report);
  return report.assumption1_ok() && report.assumption2_ok() ? 0 : 1;
}

struct RunArgs {
  std::string env;
  std::optional<fs::path> model;
  std::string theta_true = "all";
  std::size_t horizon = 2000;
  std::size_t paths = 20000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  fs::path out = "results";
  std::optional<std::string> highlight;
  std::optional<fs::path> cache;
  std::string regret = "gap";
};

int cmd_run(const RunArgs& args) {
  const PmdpModel model = args.model ? load_model(*args.model) : envs::build_env(args.env);
  fs::create_directories(args.out);
  const fs::path cache_path = args.cache.value_or(args.out / "policy_cache.txt");
  const PolicyCache cache = load_or_build_policy_cache(cache_path, model, {}, args.workers);
  validate_cache(cache, model);

  const std::vector<ParamIndex> thetas = resolve_thetas(model, args.theta_true);
  ParamIndex highlight = thetas.size() == 1 ? thetas.front() : model.num_params() / 2;
  if (args.highlight) highlight = resolve_thetas(model, *args.highlight).front();

  std::ifstream cache_in(cache_path);
  std::stringstream cache_bytes;
  cache_bytes << cache_in.rdbuf();

  std::ofstream manifest(args.out / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest in " + args.out.string());
  manifest << "env=" << args.env << '\n'
           << "model_hash=" << hash_hex(model_hash(model)) << '\n'
           << "policy_cache_hash=" << hash_hex(fnv1a64(cache_bytes.str())) << '\n'
           << "horizon=" << args.horizon << '\n'
           << "n_paths=" << args.paths << '\n'
           << "master_seed=" << args.seed << '\n'
           << "true_theta=" << format_double(model.param_value(highlight)) << '\n'
           << "regret=" << args.regret << '\n';

  const RegretMeasure measure = parse_regret_measure(args.regret);
  const Posterior prior = Posterior::uniform(model.num_params());
  for (ParamIndex k : thetas) {
    ExperimentConfig cfg;
    cfg.theta_true = k;
    cfg.horizon = args.horizon;
    cfg.n_paths = args.paths;
    cfg.master_seed = args.seed;
    cfg.workers = args.workers;
    cfg.env_id = args.env;
    cfg.measure = measure;
    const RegretCurve curve = run_experiment(model, cache, prior, cfg);
    const std::string file = args.env + "_theta_" + std::to_string(k) + ".csv";
    export_csv(curve, args.out / file);
    manifest << "curve=" << format_double(curve.theta_star) << ',' << file << '\n';

    std::cout << args.env << " theta*=" << curve.theta_star << "  regret(T)=" << curve.avg_regret.back()
              << "  posterior_error(T)=" << curve.posterior_error.back();
    try {
      const DecayFit fit = fit_decay(curve.posterior_error, std::min<std::size_t>(200, args.horizon - 1));
      std::cout << "  decay b=" << fit.b << " r2=" << fit.r2;
    } catch (const Error&) {
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thompson sampling for parameterized MDPs"};
  app.require_subcommand(1);

  std::string build_env = "admission";
  std::vector<std::string> build_params;
  fs::path build_out;
  auto* build = app.add_subcommand("build", "Write a benchmark model file");
  build->add_option("--env", build_env, "admission | inventory | pricing")->required();
  build->add_option("--param", build_params, "Parameter override key=value (lists comma-separated)");
  build->add_option("--out", build_out, "Output model file")->required();

  std::optional<fs::path> check_model, check_mu_bar;
  std::optional<std::string> check_env;
  auto* check = app.add_subcommand("check", "Report the learning assumptions of a model");
  check->add_option("--model", check_model, "Model file");
  check->add_option("--env", check_env, "Benchmark environment instead of a model file");
  check->add_option("--mu-bar", check_mu_bar, "Reference policy file: one action (index or name) per state");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run Monte Carlo Thompson-sampling experiments");
  run->add_option("--env", run_args.env, "Environment id")->required();
  run->add_option("--model", run_args.model, "Model file (defaults to the built-in environment)");
  run->add_option("--theta-true", run_args.theta_true, "True parameter value, or 'all'");
  run->add_option("--horizon", run_args.horizon, "Epochs per path")->check(CLI::PositiveNumber);
  run->add_option("--paths", run_args.paths, "Sample paths per true parameter")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_args.seed, "Master seed");
  run->add_option("--workers", run_args.workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--highlight", run_args.highlight, "Parameter value recorded as the true one in the manifest");
  run->add_option("--cache", run_args.cache, "Policy cache file (default <out>/policy_cache.txt)");
  run->add_option("--regret", run_args.regret, "Regret integrand: gap (bias-corrected, default) or raw (J* - rbar)")
      ->check(CLI::IsMember({"gap", "raw"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build(build_env, build_params, build_out);
    if (*check) {
      if (!check_model && !check_env) throw InvalidArgument("check needs --model or --env");
      return cmd_check(check_model, check_env, check_mu_bar);
    }
    if (*run) return cmd_run(run_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
