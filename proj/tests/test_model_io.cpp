#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pmdp/envs.hpp"
#include "pmdp/errors.hpp"
#include "pmdp/model_io.hpp"

using namespace pmdp;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

void expect_identical(const PmdpModel& a, const PmdpModel& b) {
  ASSERT_EQ(a.num_states(), b.num_states());
  ASSERT_EQ(a.num_actions(), b.num_actions());
  ASSERT_EQ(a.num_params(), b.num_params());
  EXPECT_EQ(a.name(), b.name());
  for (ParamIndex k = 0; k < a.num_params(); ++k) EXPECT_TRUE(same_bits(a.param_value(k), b.param_value(k)));
  for (State s = 0; s < a.num_states(); ++s) {
    for (Action x = 0; x < a.num_actions(); ++x) {
      ASSERT_EQ(a.outcomes(s, x).size(), b.outcomes(s, x).size());
      for (std::size_t j = 0; j < a.outcomes(s, x).size(); ++j) {
        EXPECT_EQ(a.outcomes(s, x)[j].symbol, b.outcomes(s, x)[j].symbol);
        EXPECT_EQ(a.outcomes(s, x)[j].next_state, b.outcomes(s, x)[j].next_state);
        EXPECT_TRUE(same_bits(a.outcomes(s, x)[j].reward, b.outcomes(s, x)[j].reward));
      }
      for (ParamIndex k = 0; k < a.num_params(); ++k) {
        const auto pa = a.outcome_probs(k, s, x), pb = b.outcome_probs(k, s, x);
        for (std::size_t j = 0; j < pa.size(); ++j) ASSERT_TRUE(same_bits(pa[j], pb[j]));
        ASSERT_TRUE(same_bits(a.mean_reward(k, s, x), b.mean_reward(k, s, x)));
      }
    }
  }
}

}  // namespace

TEST(ModelIo, RoundTripBenchmarks) {
  for (const char* env : {"admission", "inventory", "pricing"}) {
    const PmdpModel m = envs::build_env(env);
    const std::string text = serialize_model(m);
    std::istringstream is(text);
    const PmdpModel back = read_model(is);
    expect_identical(m, back);
    EXPECT_EQ(serialize_model(back), text) << env;
    EXPECT_EQ(model_hash(back), model_hash(m)) << env;
  }
}

TEST(ModelIo, FileRoundTripWithInfeasiblePairs) {
  ModelData d;
  d.name = "gappy";
  d.num_states = 2;
  d.action_names = {"left", "right"};
  d.params = {0.1, 1.0 / 3.0};
  d.pairs.resize(4);
  d.set_factored(0, 0, {{0.25, 0.75}, {0.5, 0.5}}, {{1, 0}, {1, 0}}, {0.1, 1e-17});
  d.set_factored(1, 1, {{1.0}, {1.0}}, {{0.3, 0.7}, {0.6, 0.4}}, {-2.5});
  const PmdpModel m(d);
  const auto path = std::filesystem::temp_directory_path() / "pmdp_io_gappy.model";
  save_model(path, m);
  const PmdpModel back = load_model(path);
  expect_identical(m, back);
  EXPECT_FALSE(back.feasible(0, 1));
  EXPECT_FALSE(back.feasible(1, 0));
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), IoError);
}

TEST(ModelIo, HashTracksContent) {
  const PmdpModel a = envs::build_env("admission");
  const PmdpModel b = envs::build_env("admission", {"holding=0.16"});
  EXPECT_NE(model_hash(a), model_hash(b));
  EXPECT_EQ(model_hash(a), model_hash(envs::build_env("admission")));
  EXPECT_EQ(hash_hex(model_hash(a)).size(), 16u);
}

TEST(ModelIo, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(ModelIo, DoubleFormattingRoundTrips) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    ASSERT_TRUE(same_bits(parse_double(format_double(x)), x)) << format_double(x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(3.0), "3");
  EXPECT_TRUE(same_bits(parse_double(format_double(std::numeric_limits<double>::denorm_min())),
                        std::numeric_limits<double>::denorm_min()));
  EXPECT_THROW(parse_double("1.5x"), ParseError);
  EXPECT_THROW(parse_double(""), ParseError);
}

TEST(ModelIo, MalformedFilesRejected) {
  const std::string good = serialize_model(fixtures::bernoulli_model());
  for (const std::string& bad : {std::string("pmdp-model 2\n"), std::string("hello\n"),
                                 good.substr(0, good.size() / 2)}) {
    std::istringstream is(bad);
    EXPECT_THROW(read_model(is), Error) << bad;
  }
  std::string broken = good;
  const auto pos = broken.find("probs 0 ");
  ASSERT_NE(pos, std::string::npos);
  broken.replace(pos, 8, "probs 0 9");
  std::istringstream is(broken);
  EXPECT_THROW(read_model(is), Error);
}

TEST(ModelIo, CommentsIgnored) {
  const std::string text = "# leading comment\n" + serialize_model(fixtures::bernoulli_model());
  std::istringstream is(text);
  EXPECT_EQ(model_hash(read_model(is)), model_hash(fixtures::bernoulli_model()));
}
