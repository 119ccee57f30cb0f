#include "ntlab/nodal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "ntlab/error.hpp"
#include "ntlab/random.hpp"
#include "ntlab/sign_field.hpp"

using namespace ntlab;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction sample(int dim, int n, bool periodic, double (*fn)(const Point&)) {
  return GridFunction::sample(dim, n, periodic, fn);
}

// Midpoint-rule quadrature of max(l, 0) and of the indicator {l > 0} over
// the reference simplex, on a fine lattice of sub-cells.
SimplexPart lattice_oracle(const double* v, int dim, int res) {
  double vol = 0.0, integral = 0.0, total = 0.0;
  const auto visit = [&](double b1, double b2, double b3) {
    const double b0 = 1.0 - b1 - b2 - b3;
    if (b0 < 0) return;
    const double l = b0 * v[0] + b1 * v[1] + (dim > 1 ? b2 * v[2] : 0.0) +
                     (dim > 2 ? b3 * v[3] : 0.0);
    total += 1.0;
    if (l > 0) {
      vol += 1.0;
      integral += l;
    }
  };
  for (int i = 0; i < res; ++i) {
    const double x = (i + 0.5) / res;
    if (dim == 1) {
      visit(x, 0, 0);
      continue;
    }
    for (int j = 0; j < res; ++j) {
      const double y = (j + 0.5) / res;
      if (dim == 2) {
        visit(x, y, 0);
        continue;
      }
      for (int k = 0; k < res; ++k) visit(x, y, (k + 0.5) / res);
    }
  }
  return {vol / total, integral / total};
}

}  // namespace

TEST(SimplexPart, MatchesLatticeQuadrature) {
  CounterRng rng(11);
  for (int dim = 1; dim <= 3; ++dim) {
    const int res = dim == 1 ? 200000 : dim == 2 ? 1500 : 160;
    for (int trial = 0; trial < 12; ++trial) {
      double v[4];
      for (int i = 0; i <= dim; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
      const SimplexPart exact = simplex_positive_part(v, dim);
      const SimplexPart approx = lattice_oracle(v, dim, res);
      const double tol = dim == 3 ? 2e-2 : 2e-3;
      EXPECT_NEAR(exact.fraction, approx.fraction, tol) << "dim " << dim;
      EXPECT_NEAR(exact.mean, approx.mean, tol) << "dim " << dim;
    }
  }
}

TEST(SimplexPart, PartsAddUp) {
  CounterRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 3;
    double v[4], w[4], mean = 0.0;
    for (int i = 0; i <= dim; ++i) {
      v[i] = 2.0 * rng.uniform() - 1.0;
      w[i] = -v[i];
      mean += v[i] / (dim + 1);
    }
    const SimplexPart p = simplex_positive_part(v, dim);
    const SimplexPart m = simplex_positive_part(w, dim);
    EXPECT_NEAR(p.fraction + m.fraction, 1.0, 1e-12);
    EXPECT_NEAR(p.mean - m.mean, mean, 1e-12);
    EXPECT_GE(p.fraction, 0.0);
    EXPECT_LE(p.fraction, 1.0);
  }
}

TEST(NodalMeasure, HorizontalLineHasUnitLength) {
  for (int n : {8, 9, 16, 33, 100}) {
    auto f = sample(2, n, false, [](const Point& p) { return p[1] - 0.5; });
    const NodalEstimate est = nodal_measure(f);
    EXPECT_NEAR(est.measure, 1.0, 1e-9) << "n=" << n;
  }
}

TEST(NodalMeasure, CircleLength) {
  auto f = sample(2, 256, false, [](const Point& p) {
    return (p[0] - 0.5) * (p[0] - 0.5) + (p[1] - 0.5) * (p[1] - 0.5) - 0.09;
  });
  const NodalEstimate est = nodal_measure(f);
  EXPECT_NEAR(est.measure, 2 * kPi * 0.3, 0.005 * 2 * kPi * 0.3);
}

TEST(NodalMeasure, SineCrossingsOnCircle) {
  for (int k = 1; k <= 6; ++k) {
    for (int n : {8 * k, 8 * k + 3, 64 * k}) {
      auto f = GridFunction::sample(1, n, true,
                                    [k](const Point& p) { return std::sin(2 * kPi * k * p[0]); });
      const NodalEstimate est = nodal_measure(f);
      EXPECT_EQ(est.crossings, 2 * k) << "k=" << k << " n=" << n;
      EXPECT_EQ(est.measure, 2.0 * k);
    }
  }
}

TEST(NodalMeasure, SignFlipIsExact) {
  CounterRng rng(3);
  for (int dim = 1; dim <= 3; ++dim) {
    const int n = dim == 3 ? 12 : 40;
    GridFunction f(dim, n, dim == 2);
    for (double& v : f.values) v = 2.0 * rng.uniform() - 1.0;
    const GridFunction g = scaled(f, -1.0);
    EXPECT_EQ(nodal_measure(f).measure, nodal_measure(g).measure) << "dim " << dim;
  }
}

TEST(NodalMeasure, PlaneAndSphereAreas) {
  auto plane = sample(3, 10, false, [](const Point& p) { return p[2] - 0.5 + 0.1 * p[0]; });
  EXPECT_NEAR(nodal_measure(plane).measure, std::sqrt(1.01), 1e-9);

  auto sphere = sample(3, 64, false, [](const Point& p) {
    return (p[0] - 0.5) * (p[0] - 0.5) + (p[1] - 0.5) * (p[1] - 0.5) + (p[2] - 0.5) * (p[2] - 0.5) -
           0.09;
  });
  EXPECT_NEAR(nodal_measure(sphere).measure, 4 * kPi * 0.09, 0.02 * 4 * kPi * 0.09);
}

TEST(NodalMeasure, RefinementConverges) {
  const auto fn = [](const Point& p) {
    return std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]) + 0.3 * std::cos(2 * kPi * p[0]);
  };
  double prev = 0.0, worst = 0.0;
  for (int n : {32, 64, 128, 256}) {
    const double m = nodal_measure(GridFunction::sample(2, n, true, fn)).measure;
    if (prev > 0) worst = std::max(worst, std::abs(m - prev) * n);
    prev = m;
  }
  // n |L(n) - L(n/2)| stays bounded; the observed constant is well below 1.
  EXPECT_LT(worst, 1.0);
}

TEST(NodalMeasure, IdenticallyZeroThrows) {
  GridFunction f(2, 8, false);
  try {
    nodal_measure(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IdenticallyZero);
  }
}

TEST(NodalMeasure, ZeroNodesArePerturbedAndCounted) {
  auto f = sample(1, 11, false, [](const Point& p) { return p[0] - 0.5; });
  const NodalEstimate est = nodal_measure(f);
  EXPECT_EQ(est.perturbed_nodes, 1u);
  EXPECT_EQ(est.crossings, 1);
  EXPECT_NEAR(est.points[0][0], 0.5, 1e-12);
}

TEST(NodalMeasure, ClippedToCube) {
  auto f = sample(2, 33, false, [](const Point& p) { return p[1] - 0.5; });
  const NodalEstimate est = nodal_measure(f);
  EXPECT_NEAR(nodal_measure_in(est, {{0.5, 0.5, 0}, 0.5}), 0.5, 1e-12);
  EXPECT_NEAR(nodal_measure_in(est, {{0.0, 0.5, 0}, 0.5}), 0.25, 1e-12);
  EXPECT_EQ(nodal_measure_in(est, {{0.5, 0.1, 0}, 0.1}), 0.0);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += nodal_measure_in(est, {{0.125 + 0.25 * i, 0.5, 0}, 0.25});
  EXPECT_NEAR(sum, est.measure, 1e-12);
}

TEST(NodalMeasure, IsoperimetricRatioIsPositive) {
  auto f = GridFunction::sample(2, 128, false, [](const Point& p) {
    return std::sin(2 * kPi * p[0]) * std::sin(3 * kPi * p[1]) - 0.2;
  });
  const NodalEstimate est = nodal_measure(f);
  const SignField field(f);
  double worst = std::numeric_limits<double>::infinity();
  int checked = 0;
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j)
      for (double side : {0.1, 0.2, 0.3}) {
        const CubeRegion q{{i / 8.0, j / 8.0, 0}, side};
        const CubeStats s = field.stats(q);
        const double small = std::min(s.plus, s.minus);
        if (small <= 1e-6) continue;
        worst = std::min(worst, nodal_measure_in(est, q) / std::sqrt(small));
        ++checked;
      }
  EXPECT_GT(checked, 20);
  EXPECT_GT(worst, 0.0);
}

TEST(NodalMeasure, JsonAndCsv) {
  auto f = sample(2, 9, false, [](const Point& p) { return p[0] - 0.3; });
  const NodalEstimate est = nodal_measure(f);
  const auto j = nlohmann::json::parse(nodal_json(est));
  EXPECT_EQ(j["dim"], 2);
  EXPECT_NEAR(j["measure"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["primitives"], est.segments.size());
  std::ostringstream csv;
  write_nodal_csv(est, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x0,y0,x1,y1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(est.segments.size()));
}

TEST(SignVolumes, ConstantFunction) {
  GridFunction f(2, 17, false, std::vector<double>(17 * 17, 1.0));
  const CubeStats s = sign_volumes(f, {{0.3, 0.4, 0}, 0.2});
  EXPECT_NEAR(s.plus, 0.04, 1e-14);
  EXPECT_EQ(s.minus, 0.0);
  EXPECT_NEAR(s.volume, 0.04, 1e-14);
  EXPECT_NEAR(s.mass_plus, 0.04, 1e-14);
}

TEST(SignVolumes, HalfPlaneSplit) {
  for (int n : {16, 17, 64}) {
    auto f = sample(2, n, false, [](const Point& p) { return p[1] - 0.5; });
    const CubeStats s = sign_volumes(f, {{0.5, 0.5, 0}, 1.0});
    const double h = f.h();
    EXPECT_NEAR(s.plus, 0.5, 2 * h);
    EXPECT_NEAR(s.minus, 0.5, 2 * h);
    EXPECT_NEAR(s.plus + s.minus, s.volume, 1e-12);
    EXPECT_NEAR(s.mass_plus, 0.125, 1e-12);
  }
}

TEST(SignVolumes, SineOnCircle) {
  auto f = GridFunction::sample(1, 100, true, [](const Point& p) { return std::sin(2 * kPi * p[0]); });
  const CubeStats s = sign_volumes(f, {{0.5, 0, 0}, 1.0});
  EXPECT_NEAR(s.plus, 0.5, 2 * f.h());
  EXPECT_NEAR(s.minus, 0.5, 2 * f.h());
  EXPECT_NEAR(s.volume, 1.0, 1e-12);
}

TEST(SignVolumes, TorusCubesWrapAround) {
  auto f = GridFunction::sample(2, 32, true, [](const Point& p) {
    return std::sin(2 * kPi * p[0]) + 0.5 * std::cos(2 * kPi * p[1]);
  });
  const SignField field(f);
  const CubeStats a = field.stats({{0.05, 0.9, 0}, 0.3});
  const CubeStats b = field.stats({{1.05, -0.1, 0}, 0.3});
  EXPECT_NEAR(a.volume, 0.09, 1e-12);
  EXPECT_NEAR(a.plus, b.plus, 1e-12);
  EXPECT_NEAR(a.mass_minus, b.mass_minus, 1e-12);
}

TEST(SignVolumes, ContinuousInSide) {
  auto f = sample(2, 40, false, [](const Point& p) { return p[0] + p[1] - 0.8; });
  const SignField field(f);
  double prev = field.stats({{0.3, 0.3, 0}, 0.01}).plus;
  for (int i = 1; i <= 2000; ++i) {
    const double side = 0.01 + i * 1e-3;
    const double cur = field.stats({{0.3, 0.3, 0}, side}).plus;
    EXPECT_LE(std::abs(cur - prev), 2 * side * 1e-3 + 1e-12);
    prev = cur;
  }
}

TEST(SignVolumes, EmptyIntersectionThrows) {
  auto f = sample(2, 8, false, [](const Point& p) { return p[0]; });
  try {
    sign_volumes(f, {{3.0, 3.0, 0}, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyIntersection);
  }
}

TEST(SignVolumes, CubeGridTotalsMatchPartIntegrals) {
  auto f = sample(3, 9, false, [](const Point& p) { return p[0] - 0.3 * p[1] + 0.1 * p[2] - 0.2; });
  const SignField field(f);
  const CubeStats t = field.totals();
  const CubeStats q = field.stats({{0.5, 0.5, 0.5}, 1.0});
  EXPECT_NEAR(t.plus, q.plus, 1e-12);
  EXPECT_NEAR(t.mass_plus - t.mass_minus, 0.5 - 0.15 + 0.05 - 0.2, 1e-12);
}
