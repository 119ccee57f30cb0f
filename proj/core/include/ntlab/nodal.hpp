#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlab/geometry.hpp"
#include "ntlab/grid.hpp"
#include "ntlab/sign_field.hpp"

namespace ntlab {

// Piecewise linear zero set of a grid function. For d = 1 the measure is the
// number of sign changes; for d = 2 the length of the marching-squares
// contour; for d = 3 the area of the marching-tetrahedra surface.
struct NodalEstimate {
  int dim = 1;
  double measure = 0.0;
  long long crossings = 0;
  std::vector<Point> points;                          // d = 1
  std::vector<std::array<Point, 2>> segments;         // d = 2
  std::vector<std::array<Point, 3>> triangles;        // d = 3
  // Grid nodes whose exact zero was replaced by the perturbation below.
  std::size_t perturbed_nodes = 0;
  double perturbation = 0.0;

  std::size_t primitive_count() const noexcept {
    return dim == 1 ? points.size() : dim == 2 ? segments.size() : triangles.size();
  }
};

// Throws IdenticallyZero when f vanishes at every node.
NodalEstimate nodal_measure(const GridFunction& f);

// Part of the estimate inside a cube: clipped length or area, or the number
// of crossing points for d = 1.
double nodal_measure_in(const NodalEstimate& estimate, const CubeRegion& cube);

std::string nodal_json(const NodalEstimate& estimate);
// One row per primitive: x for d = 1, x0,y0,x1,y1 for d = 2 and nine
// triangle coordinates for d = 3.
void write_nodal_csv(const NodalEstimate& estimate, std::ostream& out);

}  // namespace ntlab
