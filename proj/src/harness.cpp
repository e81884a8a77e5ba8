#include "pmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "pmdp/errors.hpp"
#include "pmdp/model_io.hpp"

namespace pmdp {

namespace {

// Paths processed between sequential reductions.
constexpr std::size_t kChunk = 256;

struct PathSummary {
  std::vector<double> avg_regret;
  std::vector<double> avg_raw_regret;
  std::vector<double> posterior_error;
};

PathSummary summarize(const PmdpModel& model, const PolicyCache& cache, const Trajectory& tr,
                      RegretMeasure measure) {
  const std::size_t T = tr.length();
  PathSummary out;
  out.avg_regret.resize(T + 1);
  out.avg_raw_regret.resize(T + 1);
  double gap_sum = 0.0, raw_sum = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const State s = tr.states[t - 1];
    const Action a = tr.actions[t - 1];
    const double raw = regret_increment(model, cache, tr.theta_true, s, a);
    raw_sum += raw;
    gap_sum += measure == RegretMeasure::Raw ? raw : bellman_gap(model, cache, tr.theta_true, s, a);
    out.avg_regret[t] = gap_sum / static_cast<double>(t);
    out.avg_raw_regret[t] = raw_sum / static_cast<double>(t);
  }
  out.avg_regret[0] = out.avg_regret[1];
  out.avg_raw_regret[0] = out.avg_raw_regret[1];
  out.posterior_error = tr.posterior_error;
  return out;
}

}  // namespace

const char* to_string(RegretMeasure m) { return m == RegretMeasure::Raw ? "raw" : "gap"; }

RegretMeasure parse_regret_measure(const std::string& text) {
  if (text == "gap") return RegretMeasure::BellmanGap;
  if (text == "raw") return RegretMeasure::Raw;
  throw InvalidArgument("unknown regret measure '" + text + "' (expected gap or raw)");
}

RegretCurve run_experiment(const PmdpModel& model, const PolicyCache& cache, const Posterior& prior,
                           const ExperimentConfig& config) {
  if (config.n_paths == 0) throw InvalidArgument("n_paths must be at least 1");
  if (config.horizon == 0) throw InvalidArgument("horizon must be at least 1");
  if (config.theta_true >= model.num_params()) throw InvalidArgument("true parameter index out of range");
  if (cache.solutions.size() != model.num_params()) throw InvalidArgument("policy cache does not cover every parameter");

  const std::size_t T = config.horizon;
  RegretCurve curve;
  curve.env_id = config.env_id.empty() ? model.name() : config.env_id;
  curve.model_hash = model_hash(model);
  curve.theta_index = config.theta_true;
  curve.theta_star = model.param_value(config.theta_true);
  curve.horizon = T;
  curve.n_paths = config.n_paths;
  curve.master_seed = config.master_seed;
  curve.measure = config.measure;

  std::vector<double> sum_regret(T + 1, 0.0), sum_sq_regret(T + 1, 0.0), sum_raw(T + 1, 0.0),
      sum_error(T + 1, 0.0);
  std::vector<PathSummary> chunk(kChunk);
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  for (std::size_t begin = 0; begin < config.n_paths; begin += kChunk) {
    const std::size_t end = std::min(config.n_paths, begin + kChunk);
    std::vector<std::exception_ptr> errors(end - begin);
    std::atomic<std::size_t> next{begin};
    auto work = [&] {
      for (std::size_t i = next++; i < end; i = next++) {
        try {
          const Trajectory tr = run_path(model, cache, config.theta_true, prior, T,
                                         path_seed(config.master_seed, i), config.initial_state);
          chunk[i - begin] = summarize(model, cache, tr, config.measure);
        } catch (...) {
          errors[i - begin] = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (std::size_t i = begin; i < end; ++i) {
      if (errors[i - begin]) {
        std::string what = "unknown error";
        try {
          std::rethrow_exception(errors[i - begin]);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        throw Error("sample path " + std::to_string(i) + " (seed " +
                    std::to_string(path_seed(config.master_seed, i)) + ") failed: " + what);
      }
      const PathSummary& ps = chunk[i - begin];
      for (std::size_t t = 0; t <= T; ++t) {
        sum_regret[t] += ps.avg_regret[t];
        sum_sq_regret[t] += ps.avg_regret[t] * ps.avg_regret[t];
        sum_raw[t] += ps.avg_raw_regret[t];
        sum_error[t] += ps.posterior_error[t];
      }
    }
  }

  const double n = static_cast<double>(config.n_paths);
  curve.avg_regret.resize(T + 1);
  curve.posterior_error.resize(T + 1);
  curve.avg_regret_se.resize(T + 1);
  curve.avg_raw_regret.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    const double mean = sum_regret[t] / n;
    curve.avg_regret[t] = mean;
    curve.avg_raw_regret[t] = sum_raw[t] / n;
    curve.posterior_error[t] = std::clamp(sum_error[t] / n, 0.0, 1.0);
    const double var = config.n_paths > 1 ? std::max(0.0, (sum_sq_regret[t] - n * mean * mean) / (n - 1.0)) : 0.0;
    curve.avg_regret_se[t] = std::sqrt(var / n);
  }
  return curve;
}

void write_csv(std::ostream& os, const RegretCurve& curve) {
  if (curve.horizon == 0 || curve.avg_regret.size() != curve.horizon + 1 ||
      curve.posterior_error.size() != curve.horizon + 1) {
    throw InvalidArgument("cannot export an empty or misaligned curve");
  }
  os << "#env=" << curve.env_id << '\n';
  os << "#model_hash=" << hash_hex(curve.model_hash) << '\n';
  os << "#theta_index=" << curve.theta_index << '\n';
  os << "#theta_star=" << format_double(curve.theta_star) << '\n';
  os << "#horizon=" << curve.horizon << '\n';
  os << "#n_paths=" << curve.n_paths << '\n';
  os << "#master_seed=" << curve.master_seed << '\n';
  os << "#regret=" << to_string(curve.measure) << '\n';
  os << kCsvHeader << '\n';
  const std::string theta = format_double(curve.theta_star);
  for (std::size_t t = 0; t <= curve.horizon; ++t) {
    os << t << ',' << theta << ',' << format_double(curve.avg_regret[t]) << ','
       << format_double(curve.posterior_error[t]) << ',';
    if (const auto inv = curve.inv_regret(t)) os << format_double(*inv);
    os << '\n';
  }
}

void export_csv(const RegretCurve& curve, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os, curve);
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

RegretCurve read_csv(std::istream& is) {
  RegretCurve curve;
  std::map<std::string, std::string> meta;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) meta[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError("unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() == 4 && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw ParseError("bad CSV row: " + line);
    const auto t = static_cast<std::size_t>(std::stoull(fields[0]));
    if (t != curve.avg_regret.size()) throw ParseError("CSV rows out of order");
    curve.theta_star = parse_double(fields[1]);
    curve.avg_regret.push_back(parse_double(fields[2]));
    curve.posterior_error.push_back(parse_double(fields[3]));
  }
  if (!header_seen || curve.avg_regret.empty()) throw ParseError("CSV has no data rows");
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ParseError("CSV metadata missing '" + key + "'");
    return it->second;
  };
  curve.env_id = get("env");
  curve.model_hash = std::stoull(get("model_hash"), nullptr, 16);
  curve.theta_index = std::stoull(get("theta_index"));
  curve.horizon = std::stoull(get("horizon"));
  curve.n_paths = std::stoull(get("n_paths"));
  curve.master_seed = std::stoull(get("master_seed"));
  if (const auto it = meta.find("regret"); it != meta.end()) curve.measure = parse_regret_measure(it->second);
  if (curve.avg_regret.size() != curve.horizon + 1) throw ParseError("CSV row count does not match horizon");
  return curve;
}

RegretCurve read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_csv(is);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateFit("fit_line needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("fit_line: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

DecayFit fit_decay(std::span<const double> values, std::size_t t_min) {
  if (t_min >= values.size()) throw InvalidArgument("fit_decay: t_min beyond the sequence");
  std::vector<double> ts, logs;
  for (std::size_t t = t_min; t < values.size(); ++t) {
    if (values[t] > 0.0) {
      ts.push_back(static_cast<double>(t));
      logs.push_back(std::log(values[t]));
    }
  }
  if (ts.size() < 3) throw DegenerateFit("fit_decay needs at least three positive points");
  const LineFit line = fit_line(ts, logs);
  return {std::exp(line.intercept), -line.slope, line.r2};
}

LineFit fit_inverse_regret(const RegretCurve& curve, std::size_t t_lo, std::size_t t_hi) {
  if (t_hi >= curve.avg_regret.size() || t_lo > t_hi) throw InvalidArgument("inverse-regret window out of range");
  std::vector<double> ts, inv;
  for (std::size_t t = t_lo; t <= t_hi; ++t) {
    const auto v = curve.inv_regret(t);
    if (!v) throw DegenerateFit("average regret is nonpositive at t=" + std::to_string(t));
    ts.push_back(static_cast<double>(t));
    inv.push_back(*v);
  }
  return fit_line(ts, inv);
}

}  // namespace pmdp
