#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmdp/model.hpp"
#include "pmdp/posterior.hpp"
#include "pmdp/thompson.hpp"

namespace pmdp {

/// Per-epoch regret integrand used for avg_regret.
enum class RegretMeasure {
  /// bellman_gap: J* - rbar corrected by the bias change h*(S_i) - E h*(S_{i+1}).
  BellmanGap,
  /// regret_increment: J* - rbar.
  Raw,
};

const char* to_string(RegretMeasure m);
RegretMeasure parse_regret_measure(const std::string& text);

/// Path-averaged learning curves of one Monte Carlo experiment.
struct RegretCurve {
  std::string env_id;
  std::uint64_t model_hash = 0;
  ParamIndex theta_index = 0;
  double theta_star = 0.0;
  std::size_t horizon = 0;
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;
  RegretMeasure measure = RegretMeasure::BellmanGap;

  /// Entry t (0..T): mean over paths of (1/L) sum_{i<L} of the measure's
  /// integrand at (S_i, A_i), with prefix length L = max(t, 1). The gap curve
  /// has the raw curve's expectation minus the initial-state transient
  /// (h*(S_0) - E h*(S_L)) / L.
  std::vector<double> avg_regret;
  /// Prefix average of regret_increment whatever the measure. Not exported.
  std::vector<double> avg_raw_regret;
  /// Entry t: mean over paths of 1 - pi_t(theta*).
  std::vector<double> posterior_error;
  /// Standard error of avg_regret across paths. Not exported.
  std::vector<double> avg_regret_se;

  /// 1 / avg_regret where positive.
  std::optional<double> inv_regret(std::size_t t) const {
    return avg_regret[t] > 0.0 ? std::optional<double>(1.0 / avg_regret[t]) : std::nullopt;
  }
};

struct ExperimentConfig {
  ParamIndex theta_true = 0;
  std::size_t horizon = 2000;
  std::size_t n_paths = 20000;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  State initial_state = 0;
  RegretMeasure measure = RegretMeasure::BellmanGap;
  std::string env_id;
};

/**
 * Runs n_paths Thompson-sampling paths and averages them per epoch. Path i
 * uses path_seed(master_seed, i); per-path results are reduced in path order,
 * so the curve does not depend on the worker count.
 *
 * A failing path aborts the experiment with an Error naming its index and seed.
 */
RegretCurve run_experiment(const PmdpModel& model, const PolicyCache& cache, const Posterior& prior,
                           const ExperimentConfig& config);

inline constexpr const char* kCsvHeader = "t,theta_star,avg_regret,posterior_error,inv_regret";

/// Writes `#key=value` metadata lines, the header and one row per epoch.
void export_csv(const RegretCurve& curve, const std::filesystem::path& path);
void write_csv(std::ostream& os, const RegretCurve& curve);
RegretCurve read_csv(const std::filesystem::path& path);
RegretCurve read_csv(std::istream& is);

struct DecayFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(y_t) = log(a) - b t over t >= t_min, using the
/// positive entries only. Throws DegenerateFit with fewer than 3 of them.
DecayFit fit_decay(std::span<const double> values, std::size_t t_min);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope x. r2 is 1 when y is constant.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Inverse regret on t in [t_lo, t_hi] regressed on t. Throws DegenerateFit if
/// any epoch in the window has nonpositive average regret.
LineFit fit_inverse_regret(const RegretCurve& curve, std::size_t t_lo, std::size_t t_hi);

}  // namespace pmdp
