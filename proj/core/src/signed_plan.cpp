#include <algorithm>
#include <cmath>
#include <map>

#include "ntlab/error.hpp"
#include "ntlab/summation.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

namespace {

DiscreteMeasure collect(const std::map<Point, CompensatedSum>& acc, int dim) {
  DiscreteMeasure m;
  m.dim = dim;
  for (const auto& [p, s] : acc) {
    const double w = s.value();
    if (w == 0.0) continue;
    m.points.push_back(p);
    m.weights.push_back(w);
    m.total += w;
  }
  return m;
}

double deviation(const DiscreteMeasure& got, const DiscreteMeasure& want) {
  std::map<Point, double> diff;
  for (std::size_t i = 0; i < got.size(); ++i) diff[got.points[i]] += got.weights[i];
  for (std::size_t i = 0; i < want.size(); ++i) diff[want.points[i]] -= want.weights[i];
  double worst = 0.0;
  for (const auto& [p, v] : diff) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace

SignedMarginals signed_marginals(const SignedPlan& plan) {
  std::map<Point, CompensatedSum> a, b;
  for (const auto& e : plan.entries) {
    a[e.src] += e.mass;
    b[e.dst] += e.mass;
  }
  return {collect(a, plan.dim), collect(b, plan.dim)};
}

double marginal_deviation(const SignedPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const auto m = signed_marginals(plan);
  return std::max(deviation(m.first, mu), deviation(m.second, nu));
}

double signed_plan_cost(const SignedPlan& plan, double p, Metric metric) {
  if (!(p >= 1.0)) throw Error(ErrorCode::NonPositive, "exponent p must be at least 1");
  CompensatedSum s;
  for (const auto& e : plan.entries) {
    const double d = distance(e.src, e.dst, metric);
    if (d == 0.0 || e.mass == 0.0) continue;
    s += std::abs(e.mass) * (p == 1.0 ? d : std::pow(d, p));
  }
  return s.value();
}

double signed_plan_cost(const SignedPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        double p, Metric metric) {
  const double dev = marginal_deviation(plan, mu, nu);
  if (dev > 1e-9)
    throw Error(ErrorCode::InfeasibleMarginals,
                "signed plan marginals deviate by " + std::to_string(dev));
  return signed_plan_cost(plan, p, metric);
}

SignedPlan staircase_plan(int n) {
  if (n < 1) throw Error(ErrorCode::NonPositive, "staircase needs n >= 1");
  SignedPlan plan;
  plan.dim = 1;
  plan.entries.reserve(2 * static_cast<std::size_t>(n) + 1);
  plan.entries.push_back({{0.0, 0, 0}, {0.0, 0, 0}, 1.0});
  const double two_n = 2.0 * n;
  for (int j = 1; j <= n; ++j) {
    const double y = (2.0 * j - 1.0) / two_n;
    plan.entries.push_back({{static_cast<double>(j) / n, 0, 0}, {y, 0, 0}, 1.0});
    plan.entries.push_back({{static_cast<double>(j - 1) / n, 0, 0}, {y, 0, 0}, -1.0});
  }
  return plan;
}

DiscreteMeasure dirac(double x, int dim) {
  DiscreteMeasure m;
  m.dim = dim;
  m.add({x, 0, 0}, 1.0);
  return m;
}

}  // namespace ntlab
