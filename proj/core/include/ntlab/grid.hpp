#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlab/geometry.hpp"

namespace ntlab {

// Samples of a real function on a regular grid. Cube grids place n nodes per
// axis at i/(n-1); torus grids place n cell centres per axis at (i+1/2)/n.
// Values are stored row-major with the last axis fastest.
struct GridFunction {
  int dim = 1;
  int n = 2;
  bool periodic = false;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(int dim, int n, bool periodic);
  GridFunction(int dim, int n, bool periodic, std::vector<double> values);

  static GridFunction sample(int dim, int n, bool periodic,
                             const std::function<double(const Point&)>& fn);

  double h() const noexcept { return periodic ? 1.0 / n : 1.0 / (n - 1); }
  std::size_t size() const noexcept { return values.size(); }
  double coord(int i) const noexcept { return periodic ? (i + 0.5) * h() : i * h(); }
  Point point(std::size_t flat) const noexcept;
  std::array<int, 3> unflatten(std::size_t flat) const noexcept;
  std::size_t flatten(const std::array<int, 3>& idx) const noexcept;

  // Quadrature weight of a grid atom: h^d on the torus, the trapezoid dual
  // cell volume on the cube.
  double weight(std::size_t flat) const noexcept;
  double total_weight() const noexcept;

  void validate() const;
};

enum class Sign { Plus, Minus };

struct DiscreteMeasure {
  int dim = 1;
  std::vector<Point> points;
  std::vector<double> weights;
  double total = 0.0;
  // Flat grid index of each atom when built from a GridFunction.
  std::vector<std::size_t> grid_index;

  std::size_t size() const noexcept { return weights.size(); }
  bool empty() const noexcept { return weights.empty(); }
  void add(const Point& p, double w);
  void validate() const;
};

struct Norms {
  double l1 = 0.0;
  double linf = 0.0;
};

GridFunction positive_part(const GridFunction& f);
GridFunction negative_part(const GridFunction& f);
GridFunction enforce_zero_mean(const GridFunction& f);
DiscreteMeasure to_measure(const GridFunction& f, Sign sign);
Norms norms(const GridFunction& f);
double weighted_mean(const GridFunction& f);
GridFunction scaled(const GridFunction& f, double factor);

// CSV: first line "dim,n,periodic", then one line per row of the last axis.
void write_csv(const GridFunction& f, std::ostream& out);
GridFunction read_csv(std::istream& in);
// Binary: uint32 dim, uint32 periodic, dim x uint32 extents, then n^d
// little-endian f64 values.
void write_binary(const GridFunction& f, std::ostream& out);
GridFunction read_binary(std::istream& in);

void save(const GridFunction& f, const std::string& path);
GridFunction load(const std::string& path);

}  // namespace ntlab
