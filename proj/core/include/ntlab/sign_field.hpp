#pragma once

#include <cstddef>
#include <vector>

#include "ntlab/geometry.hpp"
#include "ntlab/grid.hpp"

namespace ntlab {

// Positive part of a linear function on a simplex, from its vertex values.
struct SimplexPart {
  double fraction = 0.0;  // volume of {l > 0} / simplex volume
  double mean = 0.0;      // integral of max(l, 0) / simplex volume
};

SimplexPart simplex_positive_part(const double* values, int dim);

struct CubeStats {
  double volume = 0.0;  // V(Q intersected with the domain)
  double plus = 0.0;    // V(Q intersected with {f > 0})
  double minus = 0.0;   // V(Q intersected with {f < 0})
  double mass_plus = 0.0;
  double mass_minus = 0.0;
  // Volume of sign-changing grid cells inside Q.
  double mixed = 0.0;

  double mass_abs() const noexcept { return mass_plus + mass_minus; }
};

// Sign volumes and part integrals of the piecewise linear interpolant of a
// grid function on the Kuhn triangulation of its cells. Whole cells are
// integrated exactly; cells cut by a query cube contribute their cell
// average times the overlap volume, which keeps every quantity continuous in
// the cube's side length.
class SignField {
 public:
  explicit SignField(const GridFunction& f);

  int dim() const noexcept { return dim_; }
  bool periodic() const noexcept { return periodic_; }
  double spacing() const noexcept { return h_; }

  // Throws EmptyIntersection when the cube misses the domain.
  CubeStats stats(const CubeRegion& region) const;
  CubeStats totals() const noexcept { return totals_; }

 private:
  struct Piece {
    int begin = 0, end = 0;  // cell range [begin, end)
    double fraction = 1.0;   // overlap per cell, as a fraction of h
  };

  void axis_pieces(double lo, double hi, std::vector<Piece>& out) const;
  double block_sum(const std::vector<double>& prefix, const int* begin, const int* end) const;

  int dim_;
  int cells_;  // cells per axis
  bool periodic_;
  double h_;
  double cell_volume_;
  // Prefix sums over cells of the per-cell fractions and mean parts.
  std::vector<double> plus_, minus_, mass_plus_, mass_minus_, mixed_;
  CubeStats totals_;
};

CubeStats sign_volumes(const GridFunction& f, const CubeRegion& region);

}  // namespace ntlab
