#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace ntlab {

// Points always carry three coordinates; unused trailing axes stay zero so
// distances can be computed without knowing the dimension.
using Point = std::array<double, 3>;

enum class Metric { Euclidean, Torus };

inline double axis_gap(double a, double b, Metric m) noexcept {
  double g = std::abs(a - b);
  if (m == Metric::Torus) {
    g -= std::floor(g);
    g = std::min(g, 1.0 - g);
  }
  return g;
}

inline double distance(const Point& x, const Point& y, Metric m) noexcept {
  const double a = axis_gap(x[0], y[0], m);
  const double b = axis_gap(x[1], y[1], m);
  const double c = axis_gap(x[2], y[2], m);
  return std::sqrt(a * a + b * b + c * c);
}

const char* to_string(Metric m) noexcept;
Metric parse_metric(const std::string& name);

// Open axis-aligned cube {x : |x_i - center_i| < side/2}.
struct CubeRegion {
  Point center{0.0, 0.0, 0.0};
  double side = 0.0;

  bool contains(const Point& p, int dim) const noexcept {
    for (int i = 0; i < dim; ++i)
      if (!(std::abs(p[i] - center[i]) < 0.5 * side)) return false;
    return true;
  }
};

}  // namespace ntlab
