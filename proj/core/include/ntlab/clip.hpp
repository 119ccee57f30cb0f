#pragma once

#include <array>

#include "ntlab/geometry.hpp"

namespace ntlab {

// Length of the part of segment [a, b] inside the cube (first `dim` axes).
double clipped_length(const Point& a, const Point& b, const CubeRegion& cube, int dim);

// Area of the part of a 3-D triangle inside the cube.
double clipped_area(const std::array<Point, 3>& triangle, const CubeRegion& cube);

double triangle_area(const Point& a, const Point& b, const Point& c);

}  // namespace ntlab
