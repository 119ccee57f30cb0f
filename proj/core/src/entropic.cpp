#include <algorithm>
#include <cmath>
#include <limits>

#include "ntlab/error.hpp"
#include "ntlab/summation.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

namespace {

double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

// Log-domain Sinkhorn with geometric annealing of the regularization, then
// rounding onto the transport polytope.
EntropicResult w1_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                           double reg, const EntropicOptions& opt) {
  if (!(reg > 0.0)) throw Error(ErrorCode::NonPositive, "regularization must be positive");
  if (mu.empty() || nu.empty()) throw Error(ErrorCode::EmptySupport, "measure has no atoms");
  if (std::abs(mu.total - nu.total) > 1e-9 * std::max(mu.total, nu.total))
    throw Error(ErrorCode::MassMismatch, "total masses differ beyond 1e-9 relative");

  const std::size_t n = mu.size(), m = nu.size();
  const double total = mu.total;
  std::vector<double> a(n), b(m), la(n), lb(m);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = mu.weights[i] / total;
    la[i] = std::log(a[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    b[j] = nu.weights[j] / nu.total;
    lb[j] = std::log(b[j]);
  }
  std::vector<double> C(n * m);
  double cmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      C[i * m + j] = distance(mu.points[i], nu.points[j], metric);
      cmax = std::max(cmax, C[i * m + j]);
    }

  std::vector<double> f(n, 0.0), g(m, 0.0), row(std::max(n, m));
  double eps = std::max(reg, cmax);
  int iter = 0;
  double err = std::numeric_limits<double>::infinity();
  for (;;) {
    const bool last = eps <= reg;
    const double tol = last ? opt.tolerance : std::max(opt.tolerance, 1e-3);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) row[j] = (g[j] - C[i * m + j]) / eps;
        f[i] = eps * (la[i] - log_sum_exp(row.data(), m));
      }
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) row[i] = (f[i] - C[i * m + j]) / eps;
        g[j] = eps * (lb[j] - log_sum_exp(row.data(), n));
      }
      ++iter;
      // After the g update columns are exact; measure the row error.
      if (iter % 10 == 0 || last) {
        err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) row[j] = (f[i] + g[j] - C[i * m + j]) / eps;
          err += std::abs(std::exp(log_sum_exp(row.data(), m)) - a[i]);
        }
        if (err <= tol) break;
      }
      if (iter >= opt.max_iterations)
        throw Error(ErrorCode::NonConvergence,
                    "Sinkhorn did not reach tolerance; marginal error " + std::to_string(err));
    }
    if (last) break;
    eps = std::max(reg, eps * opt.scaling_factor);
  }

  std::vector<double> P(n * m);
  CompensatedSum cost, kl;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double lp = (f[i] + g[j] - C[i * m + j]) / eps;
      const double p = std::exp(lp);
      P[i * m + j] = p;
      cost += p * C[i * m + j];
      if (p > 0.0) kl += p * (lp - la[i] - lb[j]);
    }

  EntropicResult r;
  r.iterations = iter;
  r.marginal_error = err;
  r.transport_cost = total * cost.value();
  r.regularized_objective = total * (cost.value() + reg * kl.value());

  // Rounding: shrink rows then columns onto the marginals, then add the
  // rank-one correction carrying the remaining deficit.
  std::vector<double> rs(n, 0.0), cs(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) rs[i] += P[i * m + j];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rs[i] > a[i] ? a[i] / rs[i] : 1.0;
    for (std::size_t j = 0; j < m; ++j) P[i * m + j] *= x;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cs[j] += P[i * m + j];
  for (std::size_t j = 0; j < m; ++j) {
    const double y = cs[j] > b[j] ? b[j] / cs[j] : 1.0;
    for (std::size_t i = 0; i < n; ++i) P[i * m + j] *= y;
  }
  std::fill(rs.begin(), rs.end(), 0.0);
  std::fill(cs.begin(), cs.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      rs[i] += P[i * m + j];
      cs[j] += P[i * m + j];
    }
  double deficit = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rs[i] = std::max(0.0, a[i] - rs[i]);
    deficit += rs[i];
  }
  for (std::size_t j = 0; j < m; ++j) cs[j] = std::max(0.0, b[j] - cs[j]);
  CompensatedSum rounded;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double p = P[i * m + j];
      if (deficit > 0.0) p += rs[i] * cs[j] / deficit;
      rounded += p * C[i * m + j];
    }
  r.rounded_cost = total * rounded.value();
  return r;
}

}  // namespace ntlab
