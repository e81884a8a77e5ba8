#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "pmdp/envs.hpp"
#include "pmdp/errors.hpp"
#include "pmdp/harness.hpp"
#include "pmdp/model_io.hpp"

using namespace pmdp;

namespace {

const PmdpModel& admission() {
  static const PmdpModel m = envs::admission_model({});
  return m;
}

const PolicyCache& admission_cache() {
  static const PolicyCache c = build_policy_cache(admission());
  return c;
}

RegretCurve run(const PmdpModel& m, const PolicyCache& cache, ParamIndex theta, std::size_t T, std::size_t n,
                std::uint64_t seed = 1, std::size_t workers = 1) {
  ExperimentConfig cfg;
  cfg.theta_true = theta;
  cfg.horizon = T;
  cfg.n_paths = n;
  cfg.master_seed = seed;
  cfg.workers = workers;
  cfg.env_id = "test";
  return run_experiment(m, cache, Posterior::uniform(m.num_params()), cfg);
}

std::string csv_text(const RegretCurve& c) {
  std::ostringstream os;
  write_csv(os, c);
  return os.str();
}

RegretCurve synthetic_curve(std::size_t T) {
  RegretCurve c;
  c.env_id = "synthetic";
  c.model_hash = 0x0123456789abcdefULL;
  c.theta_index = 2;
  c.theta_star = 0.3;
  c.horizon = T;
  c.n_paths = 7;
  c.master_seed = 99;
  for (std::size_t t = 0; t <= T; ++t) {
    const double L = static_cast<double>(std::max<std::size_t>(t, 1));
    c.avg_regret.push_back(1.0 / L);
    c.posterior_error.push_back(std::exp(-0.01 * static_cast<double>(t)) / 3.0);
  }
  return c;
}

}  // namespace

TEST(Experiment, StallFixtureKeepsPosteriorErrorAtHalf) {
  const PmdpModel m = fixtures::stall_model();
  const PolicyCache cache = build_policy_cache(m);
  const RegretCurve c = run(m, cache, 0, 200, 50);
  for (double e : c.posterior_error) EXPECT_NEAR(e, 0.5, 1e-15);
}

TEST(Experiment, SingleHypothesisHasZeroRegret) {
  const PmdpModel m = envs::build_env("inventory", {"thetas=4"});
  const PolicyCache cache = build_policy_cache(m);
  const RegretCurve c = run(m, cache, 0, 300, 20);
  for (std::size_t t = 0; t <= 300; ++t) {
    EXPECT_NEAR(c.avg_regret[t], 0.0, 1e-8);
    EXPECT_EQ(c.posterior_error[t], 0.0);
  }
}

TEST(Experiment, RawMeasureAlsoReported) {
  const PmdpModel& m = admission();
  ExperimentConfig cfg;
  cfg.theta_true = 4;
  cfg.horizon = 200;
  cfg.n_paths = 30;
  cfg.measure = RegretMeasure::Raw;
  const RegretCurve raw = run_experiment(m, admission_cache(), Posterior::uniform(9), cfg);
  EXPECT_EQ(raw.avg_regret, raw.avg_raw_regret);
  cfg.measure = RegretMeasure::BellmanGap;
  const RegretCurve gap = run_experiment(m, admission_cache(), Posterior::uniform(9), cfg);
  EXPECT_EQ(gap.avg_raw_regret, raw.avg_raw_regret);
  EXPECT_NE(gap.avg_regret, raw.avg_regret);
  for (double r : gap.avg_regret) EXPECT_GE(r, -1e-9);
  EXPECT_EQ(gap.avg_regret[0], gap.avg_regret[1]);
}

TEST(Experiment, ReproducibleAcrossWorkerCounts) {
  const PmdpModel& m = admission();
  const RegretCurve a = run(m, admission_cache(), 2, 300, 300, 5, 1);
  const RegretCurve b = run(m, admission_cache(), 2, 300, 300, 5, 3);
  const RegretCurve c = run(m, admission_cache(), 2, 300, 300, 5, 1);
  EXPECT_EQ(csv_text(a), csv_text(b));
  EXPECT_EQ(csv_text(a), csv_text(c));
  EXPECT_NE(csv_text(a), csv_text(run(m, admission_cache(), 2, 300, 300, 6, 1)));
}

TEST(Experiment, StandardErrorShrinksWithPathCount) {
  const PmdpModel& m = admission();
  const std::size_t T = 400;
  const RegretCurve small = run(m, admission_cache(), 4, T, 1500, 11);
  const RegretCurve large = run(m, admission_cache(), 4, T, 3000, 11);
  const double ratio = small.avg_regret_se[T] / large.avg_regret_se[T];
  EXPECT_GE(ratio, 1.25);
  EXPECT_LE(ratio, 1.6);
}

TEST(Experiment, PosteriorErrorConcentratesMonotonically) {
  const PmdpModel& m = admission();
  const std::size_t T = 800;
  for (ParamIndex k : {0u, 4u, 8u}) {
    const RegretCurve c = run(m, admission_cache(), k, T, 1000, 21);
    const double e0 = c.posterior_error[0], e1 = c.posterior_error[T / 4], e2 = c.posterior_error[T / 2],
                 e3 = c.posterior_error[T];
    EXPECT_LE(e1, e0 + 0.02);
    EXPECT_LE(e2, e1 + 0.02);
    EXPECT_LE(e3, e2 + 0.02);
    EXPECT_LT(e3, e1);
  }
}

TEST(Experiment, PosteriorErrorDecaysOnEveryBenchmark) {
  for (const char* env : {"admission", "inventory", "pricing"}) {
    const PmdpModel m = envs::build_env(env);
    const PolicyCache cache = build_policy_cache(m);
    for (ParamIndex k = 0; k < m.num_params(); ++k) {
      const RegretCurve c = run(m, cache, k, 2000, 100, 4);
      EXPECT_LT(c.posterior_error[2000], c.posterior_error[500]) << env << " theta index " << k;
    }
  }
}

TEST(Experiment, FailingPathNamesIndexAndSeed) {
  ExperimentConfig cfg;
  cfg.theta_true = 0;
  cfg.horizon = 10;
  cfg.n_paths = 3;
  cfg.master_seed = 8;
  try {
    run_experiment(admission(), admission_cache(), Posterior::uniform(2), cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("sample path 0"), std::string::npos) << what;
    EXPECT_NE(what.find(std::to_string(path_seed(8, 0))), std::string::npos) << what;
  }
}

TEST(Experiment, Preconditions) {
  ExperimentConfig cfg;
  cfg.n_paths = 0;
  EXPECT_THROW(run_experiment(admission(), admission_cache(), Posterior::uniform(9), cfg), InvalidArgument);
  cfg.n_paths = 1;
  cfg.horizon = 0;
  EXPECT_THROW(run_experiment(admission(), admission_cache(), Posterior::uniform(9), cfg), InvalidArgument);
}

TEST(Csv, HeaderAndMetadata) {
  const std::string text = csv_text(synthetic_curve(3));
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 8u + 1u + 4u);
  EXPECT_EQ(lines[0], "#env=synthetic");
  EXPECT_EQ(lines[1], "#model_hash=0123456789abcdef");
  EXPECT_EQ(lines[8], "t,theta_star,avg_regret,posterior_error,inv_regret");
  EXPECT_EQ(lines[9].substr(0, 12), "0,0.3,1,0.33");
  EXPECT_EQ(lines[11].substr(0, 10), "2,0.3,0.5,");
  EXPECT_EQ(lines[11].substr(lines[11].size() - 2), ",2");
}

TEST(Csv, RoundTripIsBitExact) {
  RegretCurve c = synthetic_curve(50);
  c.avg_regret[7] = -0.125;
  c.avg_regret[8] = 0.0;
  c.posterior_error[9] = 1.0 / 7.0;
  std::istringstream is(csv_text(c));
  const RegretCurve back = read_csv(is);
  EXPECT_EQ(back.avg_regret, c.avg_regret);
  EXPECT_EQ(back.posterior_error, c.posterior_error);
  EXPECT_EQ(back.env_id, c.env_id);
  EXPECT_EQ(back.model_hash, c.model_hash);
  EXPECT_EQ(back.theta_index, c.theta_index);
  EXPECT_EQ(back.theta_star, c.theta_star);
  EXPECT_EQ(back.horizon, c.horizon);
  EXPECT_EQ(back.n_paths, c.n_paths);
  EXPECT_EQ(back.master_seed, c.master_seed);
  EXPECT_FALSE(back.inv_regret(7));
  EXPECT_FALSE(back.inv_regret(8));
  EXPECT_EQ(csv_text(back), csv_text(c));
}

TEST(Csv, NonpositiveRegretLeavesEmptyInverse) {
  RegretCurve c = synthetic_curve(2);
  c.avg_regret[2] = -1.0;
  const std::string text = csv_text(c);
  EXPECT_NE(text.find("\n2,0.3,-1,"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text[text.size() - 2], ',');
}

TEST(Csv, EmptyCurveRejected) {
  RegretCurve c;
  std::ostringstream os;
  EXPECT_THROW(write_csv(os, c), InvalidArgument);
  EXPECT_THROW(export_csv(synthetic_curve(2), "/nonexistent-dir/x.csv"), IoError);
}

TEST(Csv, MalformedInputRejected) {
  std::istringstream bad_header("#env=x\nt,avg\n0,1\n");
  EXPECT_THROW(read_csv(bad_header), ParseError);
  std::istringstream missing_meta(std::string(kCsvHeader) + "\n0,0.3,1,0.5,1\n");
  EXPECT_THROW(read_csv(missing_meta), ParseError);
}

TEST(Fits, ExactExponential) {
  std::vector<double> y;
  for (int t = 0; t <= 1000; ++t) y.push_back(std::exp(-0.01 * t));
  const DecayFit f = fit_decay(y, 0);
  EXPECT_NEAR(f.a, 1.0, 1e-9);
  EXPECT_NEAR(f.b, 0.01, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-9);
}

TEST(Fits, ConstantSequenceHasZeroRate) {
  const std::vector<double> y(100, 0.5);
  const DecayFit f = fit_decay(y, 10);
  EXPECT_NEAR(f.b, 0.0, 1e-15);
  EXPECT_NEAR(f.a, 0.5, 1e-12);
}

TEST(Fits, DegenerateInputs) {
  const std::vector<double> y{0.5, 0.0, 0.0, 0.1, 0.0};
  EXPECT_THROW(fit_decay(y, 0), DegenerateFit);
  EXPECT_THROW(fit_decay(y, 5), InvalidArgument);
  const std::vector<double> x{1.0, 1.0};
  EXPECT_THROW(fit_line(x, x), DegenerateFit);
}

TEST(Fits, LineAndInverseRegret) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0, 1e-15);
  EXPECT_NEAR(f.r2, 1.0, 1e-15);

  const RegretCurve c = synthetic_curve(1000);
  const LineFit inv = fit_inverse_regret(c, 500, 1000);
  EXPECT_NEAR(inv.slope, 1.0, 1e-9);
  EXPECT_NEAR(inv.intercept, 0.0, 1e-6);
  RegretCurve neg = c;
  neg.avg_regret[700] = 0.0;
  EXPECT_THROW(fit_inverse_regret(neg, 500, 1000), DegenerateFit);
}

TEST(RegretMeasureNames, RoundTrip) {
  EXPECT_EQ(parse_regret_measure(to_string(RegretMeasure::Raw)), RegretMeasure::Raw);
  EXPECT_EQ(parse_regret_measure(to_string(RegretMeasure::BellmanGap)), RegretMeasure::BellmanGap);
  EXPECT_THROW(parse_regret_measure("mean"), InvalidArgument);
}
