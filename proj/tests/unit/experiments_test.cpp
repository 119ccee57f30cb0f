#include "ntlab/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ntlab/config.hpp"
#include "ntlab/error.hpp"
#include "ntlab/nodal.hpp"
#include "ntlab/table.hpp"
#include "ntlab/transport.hpp"

using namespace ntlab;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Config, ParsesScalarsListsAndComments) {
  const KeyValueConfig kv = parse("# header\n n = 64 \nepsilons = 0.2, 0.1,0.05 # trailing\n\nname=abc\nseed=18446744073709551615\n");
  EXPECT_EQ(kv.get_int("n", 0), 64);
  EXPECT_EQ(kv.get_doubles("epsilons", {}), (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_EQ(kv.get_string("name", ""), "abc");
  EXPECT_EQ(kv.get_u64("seed", 0), 18446744073709551615ULL);
  EXPECT_EQ(kv.get_int("missing", 7), 7);
  EXPECT_EQ(kv.entries().size(), 4u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { parse("n 64\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse("n = 1\nn = 2\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse("n = 6x4\n").get_int("n", 0); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse("bogus = 1\n").check_keys({"n"}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { KeyValueConfig::load("/nonexistent/ntlab.cfg"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { experiment_config(parse("epsilons = 0.3\n"), "epsilon-family"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { experiment_config(parse("L_over_4pi2 = 1\n"), "epsilon-family"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { experiment_config(parse("experiment = staircase\n"), "decompose"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { experiment_config(parse(""), "nope"); }), ErrorCode::ConfigError);
}

TEST(Table, CsvFormatting) {
  Table t({"a", "b", "c"});
  t.add_row({1.5, std::int64_t{3}, std::string("x")});
  t.add_row({std::nan(""), std::int64_t{-1}, std::string("")});
  EXPECT_EQ(t.csv(), "a,b,c\n1.5,3,x\nnan,-1,\n");
  EXPECT_THROW(t.add_row({1.0}), Error);
  EXPECT_EQ(format_cell(0.1), "0.10000000000000001");
}

TEST(EpsilonFamily, ProfileShape) {
  const double e = 0.1;
  EXPECT_DOUBLE_EQ(epsilon_profile(0.1, e), -e * e);
  EXPECT_DOUBLE_EQ(epsilon_profile(0.4, e), -e * e);
  EXPECT_NEAR(epsilon_profile(0.45, e), -1.0 / e, 1e-12);
  EXPECT_NEAR(epsilon_profile(0.5, e), 0.0, 1e-15);
  EXPECT_NEAR(epsilon_profile(0.55, e), 1.0 / e, 1e-12);
  EXPECT_DOUBLE_EQ(epsilon_profile(0.9, e), e * e);
  for (double t = 0.0; t <= 1.0; t += 0.01) EXPECT_NEAR(epsilon_profile(1 - t, e), -epsilon_profile(t, e), 1e-12);
  // Continuity at the breakpoints.
  for (double t : {0.4, 0.45, 0.5, 0.55, 0.6})
    EXPECT_NEAR(epsilon_profile(t - 1e-9, e), epsilon_profile(t + 1e-9, e), 1e-6);
}

TEST(EpsilonFamily, GridFunctionInvariants) {
  const double e = 0.25;
  const GridFunction f = epsilon_family(2, 4097, e);
  // Closed form of the L1 norm: 1 + eps^2 - 3 eps^3 / 2.
  EXPECT_NEAR(norms(f).l1, 1 + e * e - 1.5 * e * e * e, 1e-5);
  EXPECT_NEAR(weighted_mean(f), 0.0, 1e-15);
  const GridFunction g = epsilon_family(2, 64, 0.1);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) EXPECT_EQ(g.values[g.flatten({i, j, 0})], -g.values[g.flatten({i, 63 - j, 0})]);
  EXPECT_NEAR(nodal_measure(g).measure, 1.0, 1e-12);
}

TEST(EpsilonFamily, MarginalReductionMatchesPlanarSolver) {
  ExperimentConfig cfg;
  cfg.dim = 2;
  cfg.n = 33;
  cfg.epsilons = {0.25, 0.125};
  const EpsilonResult r = run_epsilon_family(cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const EpsilonRow& row : r.rows) {
    const GridFunction f = epsilon_family(2, 33, row.eps);
    const double planar = w1_exact(to_measure(f, Sign::Plus), to_measure(f, Sign::Minus), Metric::Euclidean).cost;
    EXPECT_NEAR(row.w1, planar, 1e-8 * planar);
    EXPECT_NEAR(row.reflection_cost, row.w1, 1e-12);
    EXPECT_NEAR(row.dual_bound, row.w1, 1e-12);
    EXPECT_NEAR(row.nodal, 1.0, 1e-12);
    ASSERT_EQ(row.products.size(), 3u);
    EXPECT_NEAR(row.products[1], row.w1 * row.nodal * row.linf / (row.l1 * row.l1), 1e-15);
  }
}

TEST(CosineField, MeanZeroAndDeterministic) {
  const GridFunction a = random_cosine_field(2, 40, 5, 17);
  const GridFunction b = random_cosine_field(2, 40, 5, 17);
  const GridFunction c = random_cosine_field(2, 40, 5, 18);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_NEAR(weighted_mean(a), 0.0, 1e-15);
  // Trapezoid weights integrate each cosine mode to zero before the shift.
  const GridFunction one = random_cosine_field(1, 9, 1, 3);
  EXPECT_NEAR(one.values[0], -one.values[8], 1e-14);
}

TEST(Uncertainty, SmallSuiteIsPositive) {
  ExperimentConfig cfg = experiment_config(parse("n = 24\ntrials = 3\nmax_modes = 4\n"), "uncertainty");
  const UncertaintyResult r = run_uncertainty_suite(cfg);
  EXPECT_EQ(r.random_rows, 3u);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_TRUE(r.all_positive);
  EXPECT_GT(r.min_product, 0.0);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.product, row.w1 * row.nodal * std::pow(row.linf / row.l1, 1.5) / row.l1, 1e-12 * row.product);
    EXPECT_GE(row.modes, 0);
    EXPECT_LE(row.modes, 4);
  }
}

TEST(Staircase, ClosedForm) {
  ExperimentConfig cfg = experiment_config(parse(""), "staircase");
  const StaircaseResult r = run_staircase(cfg);
  EXPECT_EQ(r.rows.size(), 20u);
  EXPECT_LE(r.max_normalized_error, 1e-12);
  for (const auto& row : r.rows)
    if (row.p == 1.0) EXPECT_NEAR(row.cost, 1.0, 1e-12);
}

TEST(SturmScaling, SmallSweepTable) {
  ExperimentConfig cfg = experiment_config(parse("n = 128\nL_over_4pi2 = 1, 4, 16\n"), "sturm-scaling");
  const SturmResult r = run_sturm_scaling(cfg);
  ASSERT_EQ(r.scaling.rows.size(), 3u);
  EXPECT_TRUE(r.scaling.cost_dominates);
  const ExperimentOutput out = render(r);
  ASSERT_EQ(out.files.size(), 1u);
  EXPECT_EQ(out.files[0].second.substr(0, 36), "L,l1,w1_exact,plan_cost,ratio,slope,");
}

TEST(Decompose, DemoOnBothFunctions) {
  for (const char* text : {"n = 64\ntransport = skip\n", "n = 64\nfunction = epsilon\nepsilon = 0.2\ntransport = skip\n"}) {
    const DecompositionReport rep = run_decomposition_demo(experiment_config(parse(text), "decompose"));
    EXPECT_TRUE(rep.all_hold()) << text;
    const ExperimentOutput out = render(rep);
    EXPECT_EQ(out.files.size(), 3u);
  }
}

TEST(Output, ManifestAndDeterminism) {
  const auto dir = std::filesystem::temp_directory_path() / "ntlab_experiments_test";
  std::filesystem::remove_all(dir);
  const KeyValueConfig kv = parse("n = 33\nepsilons = 0.25, 0.2\nseed = 5\n");
  const ExperimentConfig cfg = experiment_config(kv, "epsilon-family");
  write_experiment((dir / "a").string(), "epsilon-family", kv, cfg, render(run_epsilon_family(cfg)), 0.5);
  write_experiment((dir / "b").string(), "epsilon-family", kv, cfg, render(run_epsilon_family(cfg)), 0.7);
  EXPECT_EQ(slurp(dir / "a" / "epsilon_family.csv"), slurp(dir / "b" / "epsilon_family.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["experiment"], "epsilon-family");
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["config"]["n"], "33");
  EXPECT_EQ(manifest["files"][0], "epsilon_family.csv");
  EXPECT_TRUE(manifest["summary"].contains("w1_eps_spread"));
  std::filesystem::remove_all(dir);
}
