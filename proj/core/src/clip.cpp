#include "ntlab/clip.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ntlab {

double clipped_length(const Point& a, const Point& b, const CubeRegion& cube, int dim) {
  double t0 = 0.0, t1 = 1.0;
  const double r = 0.5 * cube.side;
  for (int k = 0; k < dim; ++k) {
    const double lo = cube.center[k] - r, hi = cube.center[k] + r;
    const double da = b[k] - a[k];
    if (da == 0.0) {
      if (a[k] < lo || a[k] > hi) return 0.0;
      continue;
    }
    double s0 = (lo - a[k]) / da, s1 = (hi - a[k]) / da;
    if (s0 > s1) std::swap(s0, s1);
    t0 = std::max(t0, s0);
    t1 = std::min(t1, s1);
    if (t1 <= t0) return 0.0;
  }
  double len2 = 0.0;
  for (int k = 0; k < dim; ++k) len2 += (b[k] - a[k]) * (b[k] - a[k]);
  return (t1 - t0) * std::sqrt(len2);
}

double triangle_area(const Point& a, const Point& b, const Point& c) {
  const double u0 = b[0] - a[0], u1 = b[1] - a[1], u2 = b[2] - a[2];
  const double v0 = c[0] - a[0], v1 = c[1] - a[1], v2 = c[2] - a[2];
  const double x = u1 * v2 - u2 * v1, y = u2 * v0 - u0 * v2, z = u0 * v1 - u1 * v0;
  return 0.5 * std::sqrt(x * x + y * y + z * z);
}

double clipped_area(const std::array<Point, 3>& triangle, const CubeRegion& cube) {
  std::vector<Point> poly(triangle.begin(), triangle.end()), next;
  const double r = 0.5 * cube.side;
  // Sutherland-Hodgman against the six faces.
  for (int k = 0; k < 3 && !poly.empty(); ++k) {
    for (int side = 0; side < 2 && !poly.empty(); ++side) {
      const double bound = side == 0 ? cube.center[k] - r : cube.center[k] + r;
      const auto inside = [&](const Point& p) { return side == 0 ? p[k] >= bound : p[k] <= bound; };
      next.clear();
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        const bool pin = inside(p), qin = inside(q);
        if (pin) next.push_back(p);
        if (pin != qin) {
          const double t = (bound - p[k]) / (q[k] - p[k]);
          next.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]),
                          p[2] + t * (q[2] - p[2])});
        }
      }
      poly.swap(next);
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) area += triangle_area(poly[0], poly[i], poly[i + 1]);
  return area;
}

}  // namespace ntlab
