#include "ntlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ntlab/error.hpp"

namespace ntlab {

const char* to_string(Metric m) noexcept {
  return m == Metric::Torus ? "torus" : "euclidean";
}

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "torus") return Metric::Torus;
  throw Error(ErrorCode::ConfigError, "unknown metric '" + name + "'");
}

namespace {

std::size_t ipow(int n, int d) {
  std::size_t r = 1;
  for (int i = 0; i < d; ++i) r *= static_cast<std::size_t>(n);
  return r;
}

}  // namespace

GridFunction::GridFunction(int dim_, int n_, bool periodic_)
    : dim(dim_), n(n_), periodic(periodic_) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::DimensionError, "dim must be 1, 2 or 3");
  if (n < (periodic ? 1 : 2)) throw Error(ErrorCode::DimensionError, "grid too small");
  values.assign(ipow(n, dim), 0.0);
}

GridFunction::GridFunction(int dim_, int n_, bool periodic_, std::vector<double> v)
    : GridFunction(dim_, n_, periodic_) {
  if (v.size() != values.size())
    throw Error(ErrorCode::DimensionError, "value count does not match n^dim");
  values = std::move(v);
}

GridFunction GridFunction::sample(int dim, int n, bool periodic,
                                  const std::function<double(const Point&)>& fn) {
  GridFunction f(dim, n, periodic);
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = fn(f.point(i));
  return f;
}

std::array<int, 3> GridFunction::unflatten(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t GridFunction::flatten(const std::array<int, 3>& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * n + idx[a];
  return flat;
}

Point GridFunction::point(std::size_t flat) const noexcept {
  const auto idx = unflatten(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = coord(idx[a]);
  return p;
}

double GridFunction::weight(std::size_t flat) const noexcept {
  const double hh = h();
  double w = 1.0;
  if (periodic) {
    for (int a = 0; a < dim; ++a) w *= hh;
    return w;
  }
  const auto idx = unflatten(flat);
  for (int a = 0; a < dim; ++a) w *= (idx[a] == 0 || idx[a] == n - 1) ? 0.5 * hh : hh;
  return w;
}

double GridFunction::total_weight() const noexcept { return 1.0; }

void GridFunction::validate() const {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::DimensionError, "dim must be 1, 2 or 3");
  if (values.size() != ipow(n, dim))
    throw Error(ErrorCode::DimensionError, "value count does not match n^dim");
}

void DiscreteMeasure::add(const Point& p, double w) {
  points.push_back(p);
  weights.push_back(w);
  total += w;
}

void DiscreteMeasure::validate() const {
  if (points.size() != weights.size())
    throw Error(ErrorCode::DimensionError, "points and weights differ in length");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::NonPositive, "negative atom weight");
    s += w;
  }
  if (std::abs(s - total) > 1e-12 * std::max(1.0, std::abs(s)))
    throw Error(ErrorCode::MassMismatch, "total does not match the sum of weights");
}

GridFunction positive_part(const GridFunction& f) {
  GridFunction g = f;
  for (double& v : g.values) v = std::max(v, 0.0);
  return g;
}

GridFunction negative_part(const GridFunction& f) {
  GridFunction g = f;
  for (double& v : g.values) v = std::max(-v, 0.0);
  return g;
}

double weighted_mean(const GridFunction& f) {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double wi = f.weight(i);
    s += wi * f.values[i];
    w += wi;
  }
  return s / w;
}

GridFunction enforce_zero_mean(const GridFunction& f) {
  GridFunction g = f;
  const double m = weighted_mean(f);
  for (double& v : g.values) v -= m;
  // A second pass removes the rounding residue of the first.
  const double r = weighted_mean(g);
  for (double& v : g.values) v -= r;
  return g;
}

GridFunction scaled(const GridFunction& f, double factor) {
  GridFunction g = f;
  for (double& v : g.values) v *= factor;
  return g;
}

DiscreteMeasure to_measure(const GridFunction& f, Sign sign) {
  DiscreteMeasure m;
  m.dim = f.dim;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = sign == Sign::Plus ? f.values[i] : -f.values[i];
    if (v > 0.0) {
      m.add(f.point(i), v * f.weight(i));
      m.grid_index.push_back(i);
    }
  }
  return m;
}

Norms norms(const GridFunction& f) {
  Norms r;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f.values[i]);
    r.l1 += a * f.weight(i);
    r.linf = std::max(r.linf, a);
  }
  return r;
}

}  // namespace ntlab
