#include "ntlab/decomposition.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "ntlab/error.hpp"

using namespace ntlab;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction half_plane(int n) {
  return GridFunction::sample(2, n, false, [](const Point& p) { return p[1] - 0.5; });
}

GridFunction sine_product(int n) {
  return enforce_zero_mean(GridFunction::sample(2, n, false, [](const Point& p) {
    return std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]);
  }));
}

std::size_t node_at(const GridFunction& f, double x, double y) {
  const int i = static_cast<int>(std::lround(x * (f.n - 1)));
  const int j = static_cast<int>(std::lround(y * (f.n - 1)));
  return f.flatten({i, j, 0});
}

CubeRecord record(double x, double y, double side) {
  CubeRecord r;
  r.center = {x, y, 0};
  r.side = side;
  return r;
}

}  // namespace

TEST(BalanceRatio, HalfPlaneIsSymmetric) {
  for (int n : {32, 65}) {
    auto f = half_plane(n);
    EXPECT_NEAR(balance_ratio(f, {{0.5, 0.5, 0}, 1.0}), 1.0, 4 * f.h());
  }
}

TEST(BalanceRatio, PositiveCubeIsInfinite) {
  auto f = half_plane(33);
  EXPECT_EQ(balance_ratio(f, {{0.5, 0.8, 0}, 0.2}), std::numeric_limits<double>::infinity());
}

TEST(BalanceRatio, WholeCubeOfNormalizedFunction) {
  const NormalizedFunction nf = normalize_for_decomposition(sine_product(64));
  const double r = balance_ratio(nf.f, {{0.5, 0.5, 0}, 2.0});
  EXPECT_GE(r, 1.0 / (2.0 * nf.linf));
  EXPECT_LE(r, 2.0 * nf.linf);
}

TEST(StoppingScale, HalfPlaneClosedForm) {
  // f = 4(y - 1/2) after normalization, so the threshold is 100 * 25 * 2 and
  // a cube of side l > 1/2 at (1/2, 3/4) has V+ / V- = (1/2) / (l/2 - 1/4).
  auto f = half_plane(65);
  const NormalizedFunction nf = normalize_for_decomposition(f);
  EXPECT_NEAR(nf.linf, 2.0, 1e-12);
  EXPECT_NEAR(nf.threshold, 5000.0, 1e-9);
  const CubeRecord r = stopping_scale(f, node_at(f, 0.5, 0.75));
  EXPECT_TRUE(r.plus_dominant);
  EXPECT_GT(r.side, 0.5);
  EXPECT_NEAR(r.side, 0.5 + 1.0 / 5000.0, 1e-9);
  EXPECT_NEAR(r.stats.plus / r.stats.minus, 5000.0, 5000.0 * 1e-6);
  EXPECT_EQ(balance_ratio(f, {{0.5, 0.75, 0}, 0.5}), std::numeric_limits<double>::infinity());
}

TEST(StoppingScale, MinusDominantMirror) {
  auto f = half_plane(65);
  const CubeRecord r = stopping_scale(f, node_at(f, 0.5, 0.25));
  EXPECT_FALSE(r.plus_dominant);
  EXPECT_NEAR(r.side, 0.5 + 1.0 / 5000.0, 1e-9);
}

TEST(StoppingScale, SineProductSatisfiesBalanceInvariant) {
  auto f = sine_product(256);
  const NormalizedFunction nf = normalize_for_decomposition(f);
  const SignField field(nf.f);
  const CubeRecord r = stopping_scale(field, nf.f, node_at(f, 0.25, 0.25), nf.threshold);
  EXPECT_TRUE(r.plus_dominant);
  EXPECT_LE(r.residual, 1e-3);
  EXPECT_NEAR(r.stats.mass_abs(), r.stats.mass_plus + r.stats.mass_minus, 1e-15);
  // The cube grows until it reaches the nodal lines x = 1/2 or y = 1/2.
  EXPECT_GT(r.side, 0.49);
  EXPECT_LT(r.side, 0.52);
}

TEST(StoppingScale, NoBracketNextToZeroSet) {
  auto f = half_plane(64);  // y = 1/2 falls midway between two node rows
  try {
    stopping_scale(f, node_at(f, 0.5, 32.0 / 63.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoBracket);
  }
}

TEST(Families, SingleAndDisjointCubes) {
  std::vector<CubeRecord> one{record(0.5, 0.5, 0.2)};
  EXPECT_EQ(besicovitch_families(one, 2).families.size(), 1u);
  std::vector<CubeRecord> two{record(0.2, 0.2, 0.2), record(0.7, 0.7, 0.2)};
  const auto p = besicovitch_families(two, 2);
  EXPECT_EQ(p.families.size(), 1u);
  EXPECT_EQ(p.families[0].size(), 2u);
}

TEST(Families, OverlapOpensNewFamily) {
  std::vector<CubeRecord> cubes{record(0.3, 0.3, 0.2), record(0.45, 0.3, 0.2)};
  const auto p = besicovitch_families(cubes, 2);
  EXPECT_EQ(p.kept.size(), 2u);
  EXPECT_EQ(p.families.size(), 2u);
}

TEST(Families, CoveredCentreIsDropped) {
  std::vector<CubeRecord> cubes{record(0.5, 0.5, 0.1), record(0.5, 0.5, 0.4), record(0.9, 0.9, 0.05)};
  const auto p = besicovitch_families(cubes, 2);
  ASSERT_EQ(p.kept.size(), 2u);
  EXPECT_EQ(p.kept[0], 1u);  // largest first
  EXPECT_EQ(p.kept[1], 2u);
}

TEST(Families, TouchingCubesDoNotOverlap) {
  EXPECT_FALSE(cubes_overlap(record(0.25, 0.5, 0.5), record(0.75, 0.5, 0.5), 2));
  EXPECT_TRUE(cubes_overlap(record(0.25, 0.5, 0.5), record(0.74, 0.5, 0.5), 2));
}

TEST(ClassifyFull, ThresholdArithmetic) {
  // Normalized functions have linf >= 1 > 5^-d / 10, and 5^-d / 20 is below.
  std::vector<CubeRecord> cubes(2);
  for (auto& c : cubes) c.stats.volume = 0.01;
  cubes[0].stats.mass_plus = 1.0 * 0.01;
  cubes[1].stats.mass_minus = (1.0 / 25.0 / 20.0) * 0.01;
  EXPECT_EQ(classify_full(cubes, 2), 1u);
  EXPECT_TRUE(cubes[0].full);
  EXPECT_FALSE(cubes[1].full);
  EXPECT_DOUBLE_EQ(full_threshold_density(2), 1.0 / 250.0);
}

TEST(CrossoverBound, Arithmetic) {
  EXPECT_EQ(crossover_bound(0.0, 2.0, 0.1, 2), 0.0);
  const double a = crossover_bound(0.1, 2.0, 0.1, 2);
  EXPECT_NEAR(crossover_bound(0.2, 2.0, 0.1, 2), 4 * a, 1e-15);
  EXPECT_NEAR(a, 0.01 / (2 * 4 * 2.0 * 0.1), 1e-15);
  EXPECT_THROW(crossover_bound(0.1, 0.0, 0.1, 2), Error);
  EXPECT_THROW(crossover_bound(0.1, 1.0, -1.0, 2), Error);
  EXPECT_THROW(crossover_bound(-0.1, 1.0, 1.0, 2), Error);
}

TEST(VerifyChain, SineProductEndToEnd) {
  const DecompositionReport rep = verify_chain(sine_product(96));
  EXPECT_TRUE(rep.all_hold());
  for (const char* name : {"lemma_minus_plus", "lemma_plus2", "prop1_mass", "cauchy_schwarz",
                           "family_overlap_volume", "family_count_greedy", "prop3_area",
                           "transport_lower_bound", "uncertainty_product", "isoperimetric_min"}) {
    const InequalityRow* row = rep.row(name);
    ASSERT_NE(row, nullptr) << name;
    EXPECT_TRUE(row->holds) << name << " lhs=" << row->lhs << " rhs=" << row->rhs;
  }
  EXPECT_GE(rep.selected_full_mass, 0.9 / 25.0 * (1 - 1e-2));
  EXPECT_LE(rep.no_bracket_fraction(), 0.05);
  EXPECT_GT(rep.w1, 0.0);
  EXPECT_FALSE(rep.crossover.empty());
  for (const auto& c : rep.crossover) EXPECT_LE(c.bound, c.exported_cost);
}

TEST(VerifyChain, OneDimensionalCrossings) {
  auto f = GridFunction::sample(1, 512, false, [](const Point& p) { return std::cos(2 * kPi * p[0]); });
  const DecompositionReport rep = verify_chain(enforce_zero_mean(f));
  EXPECT_TRUE(rep.all_hold());
  EXPECT_EQ(rep.nodal_measure, 2.0);
  const InequalityRow* area = rep.row("prop3_area");
  ASSERT_NE(area, nullptr);
  EXPECT_GT(area->ratio, 0.0);
  // |F| = |sin(2 pi x)| / (2 pi) over the L1 norm 2 / pi.
  EXPECT_NEAR(rep.w1, 1.0 / (2 * kPi), 1e-3);
}

TEST(VerifyChain, RejectsTorusAndNonzeroMean) {
  auto torus = GridFunction::sample(2, 16, true, [](const Point& p) { return std::sin(2 * kPi * p[0]); });
  EXPECT_THROW(verify_chain(torus), Error);
  auto shifted = GridFunction::sample(2, 16, false, [](const Point& p) { return p[0]; });
  try {
    verify_chain(shifted);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassMismatch);
  }
}

TEST(VerifyChain, ReportSerialization) {
  DecompositionOptions opt;
  opt.transport = TransportMode::Skip;
  const DecompositionReport rep = verify_chain(sine_product(48), opt);
  const auto j = nlohmann::json::parse(report_json(rep));
  EXPECT_EQ(j["dim"], 2);
  EXPECT_EQ(j["records"], rep.records.size());
  EXPECT_FALSE(j.contains("w1"));
  for (const auto& row : j["inequalities"]) {
    EXPECT_TRUE(row.contains("lhs"));
    EXPECT_TRUE(row.contains("rhs"));
    EXPECT_TRUE(row.contains("ratio"));
  }
  std::ostringstream csv;
  write_cubes_csv(rep, csv);
  std::istringstream in(csv.str());
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(rep.records.size()));
}
