#include "ntlab/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ntlab/error.hpp"
#include "ntlab/random.hpp"
#include "ntlab/stats.hpp"

using namespace ntlab;

namespace {

constexpr double kPi = std::numbers::pi;

double four_pi2() { return 4 * kPi * kPi; }

GridFunction basis_grid(const Frequency& k, int dim, int n) {
  return GridFunction::sample(dim, n, true, [&](const Point& p) { return basis_eval(k, p, dim); });
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST(Stats, LineFitRecoversExactLine) {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_NEAR(fit_loglog({1, 10, 100}, {1, 0.1, 0.01}).slope, -1.0, 1e-14);
  EXPECT_THROW(fit_line({1, 1}, {0, 1}), Error);
}

TEST(Cutoff, PlateausAndSmoothBridge) {
  EXPECT_EQ(cutoff(0.0), 1.0);
  EXPECT_EQ(cutoff(0.25), 1.0);
  EXPECT_EQ(cutoff(0.75), 0.0);
  EXPECT_EQ(cutoff(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cutoff(0.5), 0.5);
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = cutoff(i / 1000.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  // One-sided first and second differences vanish at both breakpoints.
  const double e = 1e-4;
  for (double t : {0.25, 0.75}) {
    const double d1 = (cutoff(t + e) - cutoff(t - e)) / (2 * e);
    const double d2 = (cutoff(t + e) - 2 * cutoff(t) + cutoff(t - e)) / (e * e);
    EXPECT_NEAR(d1, 0.0, 1e-6);
    EXPECT_NEAR(d2, 0.0, 1e-2);
  }
}

TEST(Basis, OrthonormalOnTorusGrid) {
  const int n = 16;
  const std::vector<Frequency> ks{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {2, -1, 0}, {-2, 1, 0}, {0, 3, 0}};
  for (const auto& a : ks)
    for (const auto& b : ks) {
      const GridFunction fa = basis_grid(a, 2, n), fb = basis_grid(b, 2, n);
      double s = 0;
      for (std::size_t i = 0; i < fa.size(); ++i) s += fa.values[i] * fb.values[i];
      s /= n * n;
      EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-13);
    }
}

TEST(Synthesize, SingleModesMatchAnalytic) {
  for (const Frequency k : {Frequency{1, 0, 0}, Frequency{-1, 0, 0}, Frequency{3, -2, 0}}) {
    EigenExpansion e;
    e.dim = 2;
    e.coefficients[k] = 1.0;
    const GridFunction f = synthesize(e, 32);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Point p = f.point(i);
      EXPECT_NEAR(f.values[i], basis_eval(k, p, 2), 1e-12);
    }
  }
  EigenExpansion d1;
  d1.coefficients[{5, 0, 0}] = 0.5;
  d1.coefficients[{-2, 0, 0}] = -1.5;
  const GridFunction g = synthesize(d1, 64);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    const double expect = 0.5 * std::sqrt(2.0) * std::cos(10 * kPi * x) - 1.5 * std::sqrt(2.0) * std::sin(4 * kPi * x);
    EXPECT_NEAR(g.values[i], expect, 1e-12);
  }
}

TEST(Synthesize, EmptyExpansionIsZero) {
  EigenExpansion e;
  e.dim = 2;
  const GridFunction f = synthesize(e, 8);
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Synthesize, ParsevalAndMeanZero) {
  const EigenExpansion e = random_annulus(2, four_pi2() * 16, 7);
  double sum_sq = 0;
  for (const auto& [k, a] : e.coefficients) sum_sq += a * a;
  const GridFunction f = synthesize(e, 64);
  double l2 = 0, mean = 0;
  for (double v : f.values) {
    l2 += v * v;
    mean += v;
  }
  const double dv = 1.0 / (64.0 * 64.0);
  EXPECT_NEAR(std::sqrt(l2 * dv), std::sqrt(sum_sq), 1e-10);
  EXPECT_NEAR(mean * dv, 0.0, 1e-12);
}

TEST(Synthesize, AliasingAndConstantMode) {
  EigenExpansion e;
  e.coefficients[{8, 0, 0}] = 1.0;
  EXPECT_NO_THROW(synthesize(e, 32));
  try {
    synthesize(e, 31);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::Aliasing);
  }
  EigenExpansion c;
  c.coefficients[{0, 0, 0}] = 1.0;
  EXPECT_THROW(synthesize(c, 8), Error);
}

TEST(RandomAnnulus, FrequenciesInBand) {
  for (int d : {1, 2}) {
    const double L = four_pi2() * 25;
    const EigenExpansion e = random_annulus(d, L, 3);
    EXPECT_FALSE(e.coefficients.empty());
    for (const auto& [k, a] : e.coefficients) {
      EXPECT_GE(eigenvalue(k), L * (1 - 1e-12));
      EXPECT_LE(eigenvalue(k), 4 * L * (1 + 1e-12));
    }
    // Rim frequencies |k| = 5 and |k| = 10 are included.
    EXPECT_TRUE(e.coefficients.count({5, 0, 0}));
    EXPECT_TRUE(e.coefficients.count({-10, 0, 0}));
  }
  EXPECT_EQ(random_annulus(1, four_pi2(), 9).coefficients.size(), 4u);
}

TEST(Kernel, ConstantBelowFirstEigenvalue) {
  const BochnerRieszKernel k(2, 0.9 * four_pi2());
  EXPECT_TRUE(k.modes().empty());
  EXPECT_EQ(k.eval(Point{0.3, 0.1, 0}), 1.0);
}

TEST(Kernel, ModesBelowThreeQuartersOfL) {
  const double L = 1000;
  const BochnerRieszKernel k(2, L);
  for (const auto& m : k.modes()) {
    EXPECT_LT(eigenvalue(m.k), 0.75 * L);
    EXPECT_NEAR(m.weight, cutoff(eigenvalue(m.k) / L), 0);
  }
  // Direct sum over all lattice points in the disc, both half-planes.
  double b0 = 0;
  for (int a = -10; a <= 10; ++a)
    for (int b = -10; b <= 10; ++b) b0 += cutoff(eigenvalue({a, b, 0}) / L);
  EXPECT_NEAR(k.eval(Point{0, 0, 0}), b0, 1e-10);
}

TEST(Kernel, RowIntegralIsOne) {
  CounterRng rng(11);
  for (int d : {1, 2}) {
    const BochnerRieszKernel k(d, d == 1 ? 1e4 : 1e3);
    const int n = 4 * k.max_frequency() + 4;
    for (int t = 0; t < 10; ++t) {
      const Point x{rng.uniform(), rng.uniform(), 0};
      EXPECT_NEAR(k.row_integral(x, n), 1.0, 1e-10);
    }
  }
}

TEST(Kernel, OffsetTableMatchesDirectEvaluation) {
  const BochnerRieszKernel k(2, 800);
  const int m = 24;
  const auto table = k.offset_table(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      EXPECT_NEAR(table[i * m + j], k.eval(Point{double(i) / m, double(j) / m, 0}), 1e-11);
  EXPECT_NEAR(k.eval(Point{0.1, 0.3, 0}), k.eval(Point{-0.1, -0.3, 0}), 1e-12);
  EXPECT_NEAR(k.eval(Point{0.7, 0.2, 0}, Point{0.4, 0.9, 0}), k.eval(Point{0.3, -0.7, 0}), 1e-12);
}

TEST(Kernel, ApplyMatchesDirectConvolution) {
  const BochnerRieszKernel k(2, 600);
  const int n = 12;
  const GridFunction g = GridFunction::sample(2, n, true, [](const Point& p) {
    return std::exp(std::sin(2 * kPi * p[0])) * (p[1] - 0.4);
  });
  const GridFunction out = k.apply(g);
  const double dv = 1.0 / (n * n);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double s = 0;
    for (std::size_t y = 0; y < g.size(); ++y) s += k.eval(g.point(x), g.point(y)) * g.values[y];
    EXPECT_NEAR(out.values[x], s * dv, 1e-11);
  }
}

TEST(Kernel, ReproducesLowAndAnnihilatesHighModes) {
  for (int d : {1, 2}) {
    const double L = four_pi2() * 64;  // |k| < 8 sees the kernel
    const BochnerRieszKernel k(d, L);
    const int n = 64;
    const std::vector<Frequency> low = d == 1 ? std::vector<Frequency>{{1, 0, 0}, {-3, 0, 0}}
                                              : std::vector<Frequency>{{2, -3, 0}, {0, 3, 0}, {-1, 1, 0}};
    const std::vector<Frequency> high = d == 1 ? std::vector<Frequency>{{8, 0, 0}, {-13, 0, 0}}
                                               : std::vector<Frequency>{{8, 0, 0}, {-6, 6, 0}, {3, -9, 0}};
    for (const auto& q : low) {
      ASSERT_LE(eigenvalue(q), L / 4);
      const GridFunction phi = basis_grid(q, d, n);
      EXPECT_LT(max_diff(k.apply(phi), phi), 1e-9);
    }
    for (const auto& q : high) {
      ASSERT_GE(eigenvalue(q), L * (1 - 1e-12));
      const GridFunction phi = basis_grid(q, d, n);
      const GridFunction zero(d, n, true);
      EXPECT_LT(max_diff(k.apply(phi), zero), 1e-9);
    }
  }
}

TEST(SturmPlan, SineMarginalsAndCost) {
  // sin(2 pi m x), m = 8, L = 4 pi^2 m^2 on 512 nodes.
  const int m = 8, n = 512;
  EigenExpansion e;
  e.coefficients[{-m, 0, 0}] = 1.0 / std::sqrt(2.0);
  const GridFunction f = synthesize(e, n);
  const BochnerRieszKernel k(1, four_pi2() * m * m);
  const SturmPlan factorized = sturm_plan(f, k);
  EXPECT_LE(factorized.first_marginal_deviation, 1e-8);
  EXPECT_LE(factorized.second_marginal_deviation, 1e-8);
  EXPECT_NEAR(factorized.kernel_mass, 1.0, 1e-12);

  const SignedPlan explicit_plan = build_rho_L(f, k, 1e-8, 1024);
  EXPECT_NEAR(plan_cost(explicit_plan), factorized.cost, 1e-12 * factorized.cost + 1e-15);

  // Diagonal entries carry no cost.
  SignedPlan off;
  for (const auto& en : explicit_plan.entries)
    if (en.src != en.dst) off.entries.push_back(en);
  EXPECT_NEAR(plan_cost(off), plan_cost(explicit_plan), 1e-15);

  const double w1 = w1_exact(to_measure(f, Sign::Plus), to_measure(f, Sign::Minus), Metric::Torus).cost;
  // Continuous oracle: min_c int |F - c| with F' = sin(2 pi m x).
  EXPECT_NEAR(w1, 1.0 / (kPi * kPi * m), 1e-3 / m);
  EXPECT_GE(factorized.cost, w1);
}

TEST(SturmPlan, TwoDimensionalExplicitAgreement) {
  const double L = four_pi2() * 4;
  EigenExpansion e = random_annulus(2, L, 5);
  const GridFunction f = synthesize(e, 16);
  const BochnerRieszKernel k(2, L);
  const SturmPlan s = sturm_plan(f, k);
  const SignedPlan p = build_rho_L(f, k);
  EXPECT_NEAR(plan_cost(p), s.cost, 1e-12 * s.cost);
}

TEST(SturmPlan, ZeroFunctionGivesEmptyPlan) {
  const GridFunction zero(1, 32, true);
  const BochnerRieszKernel k(1, 500);
  EXPECT_TRUE(build_rho_L(zero, k).entries.empty());
  EXPECT_EQ(sturm_plan(zero, k).cost, 0.0);
}

TEST(SturmPlan, LowModeViolatesMarginal) {
  EigenExpansion e;
  e.coefficients[{1, 0, 0}] = 1.0;
  const GridFunction f = synthesize(e, 64);
  const BochnerRieszKernel k(1, four_pi2() * 16);
  try {
    sturm_plan(f, k);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::MarginalViolation);
  }
  EXPECT_THROW(build_rho_L(f, k), Error);
  EXPECT_THROW(sturm_plan(GridFunction(1, 8, false), k), Error);
}

TEST(KernelDecay, EnvelopeIsMonotone) {
  const BochnerRieszKernel k(1, 1e4);
  const DecayFit fit = kernel_decay(k, 20, 4096);
  ASSERT_EQ(fit.r.size(), 20u);
  EXPECT_NEAR(fit.r.front(), 0.03, 1e-12);
  EXPECT_NEAR(fit.r.back(), 0.4, 1e-12);
  for (std::size_t i = 1; i < fit.envelope.size(); ++i) EXPECT_LE(fit.envelope[i], fit.envelope[i - 1]);
  EXPECT_LT(fit.exponent, 0.0);
  EXPECT_THROW(kernel_decay(BochnerRieszKernel(1, 40), 10), Error);
}

TEST(KernelDecay, ProfileCsv) {
  std::ostringstream out;
  write_kernel_profile_csv(BochnerRieszKernel(1, 100), 3, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "r,B_L");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Scaling, SmallOneDimensionalSweep) {
  ScalingOptions opt;
  opt.dim = 1;
  opt.n = 256;
  opt.L = {four_pi2(), four_pi2() * 4, four_pi2() * 16};
  opt.trials = 2;
  const ScalingResult r = scaling_experiment(opt);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.cost_dominates);
  EXPECT_TRUE(std::isnan(r.rows[0].slope));
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.l1, 1.0, 1e-12);
    EXPECT_GE(row.plan_cost, row.w1);
    EXPECT_LE(row.max_marginal_deviation, 1e-8);
  }
  EXPECT_LT(r.slope, 0.0);
  std::ostringstream csv;
  write_scaling_csv(r, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "L,l1,w1_exact,plan_cost,ratio,slope");
}
