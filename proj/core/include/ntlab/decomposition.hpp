#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlab/geometry.hpp"
#include "ntlab/grid.hpp"
#include "ntlab/nodal.hpp"
#include "ntlab/sign_field.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

// Stopping-scale cube: the open cube at which the dominant sign volume is
// exactly `threshold` times the other one.
struct CubeRecord {
  Point center{0, 0, 0};
  double side = 0.0;
  std::size_t node = 0;  // flat grid index of the centre
  CubeStats stats;
  bool plus_dominant = true;
  bool full = false;
  bool clipped = false;  // cube pokes out of the unit cube
  // |V_dominant - threshold * V_other| / V_dominant at the returned side.
  double residual = 0.0;

  double dominant_volume() const noexcept { return plus_dominant ? stats.plus : stats.minus; }
  double minority_volume() const noexcept { return plus_dominant ? stats.minus : stats.plus; }
  double dominant_mass() const noexcept { return plus_dominant ? stats.mass_plus : stats.mass_minus; }
  double minority_mass() const noexcept { return plus_dominant ? stats.mass_minus : stats.mass_plus; }
};

// One evaluated inequality, lhs <= rhs unless the row is a lower bound with
// an unknown constant, where `holds` only means both sides are positive.
// Rows that are not `asserted` are logged for inspection.
struct InequalityRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs
  bool holds = true;
  bool asserted = true;
};

// Grid function rescaled to unit L1 norm of its piecewise linear interpolant.
struct NormalizedFunction {
  GridFunction f;
  double l1 = 0.0;    // L1 norm before rescaling
  double linf = 0.0;  // sup norm after rescaling
  double mean = 0.0;  // integral after rescaling
  // 100 * 5^d * linf.
  double threshold = 0.0;
};

NormalizedFunction normalize_for_decomposition(const GridFunction& f);

// V+(Q) / V-(Q); infinity when V-(Q) = 0.
double balance_ratio(const GridFunction& f, const CubeRegion& cube);
double balance_ratio(const SignField& field, const CubeRegion& cube);

struct ScaleSearchOptions {
  int scan_scales = 64;
  int bisection_steps = 40;
  double max_side = 2.0;
};

// Smallest side in [2h, max_side] where the cube centred at a grid node
// stops being unbalanced, from a geometric scan followed by bisection of
// V_dom - threshold * V_other. The returned side is the bracket end where
// that quantity is still >= 0. Throws NoBracket when the scan never changes
// sign or the quantity is already negative at 2h.
CubeRecord stopping_scale(const SignField& field, const GridFunction& f, std::size_t node,
                          double threshold, const ScaleSearchOptions& options = {});
// Normalizes f first; the threshold is 100 * 5^d * linf.
CubeRecord stopping_scale(const GridFunction& f, std::size_t node);

struct FamilyPartition {
  // Indices of the records kept by the centre-exclusion selection, largest
  // first; every dropped centre lies inside a kept cube.
  std::vector<std::size_t> kept;
  // Pairwise disjoint families of kept records.
  std::vector<std::vector<std::size_t>> families;
};

// Greedy family bound asserted on every partition.
int greedy_family_bound(int dim);

bool cubes_overlap(const CubeRecord& a, const CubeRecord& b, int dim) noexcept;

FamilyPartition besicovitch_families(const std::vector<CubeRecord>& records, int dim);

double full_threshold_density(int dim);
// Sets `full` on every record; returns the number of full records.
std::size_t classify_full(std::vector<CubeRecord>& records, int dim);

// nu^2 / (2 C linf side^(d-1)) with C = 2d the collar constant
// V({x in Q : d(x, dQ) < t}) <= 2d t side^(d-1).
double crossover_bound(double nu_mass, double linf, double side, int dim);

enum class TransportMode { Exact, Given, Skip };

struct DecompositionOptions {
  std::size_t max_centers = 10000;
  std::uint64_t seed = 1;
  ScaleSearchOptions search;
  double balance_tolerance = 1e-3;
  TransportMode transport = TransportMode::Exact;
  double given_w1 = 0.0;  // used with TransportMode::Given
  SolverOptions solver;
};

struct CrossoverRow {
  std::size_t record = 0;
  double exported_mass = 0.0;
  double exported_cost = 0.0;  // sum of mass * d(x, dQ) over Q x Q^c
  double bound = 0.0;
};

struct DecompositionReport {
  int dim = 1;
  int n = 0;
  double l1_input = 0.0;
  double linf = 0.0;
  double mean = 0.0;
  double threshold = 0.0;

  std::size_t candidates = 0;
  std::size_t no_bracket = 0;
  std::vector<CubeRecord> records;
  FamilyPartition partition;
  std::vector<double> family_mass;
  std::size_t selected_family = 0;
  std::vector<std::size_t> selected_full;  // record indices
  double selected_mass = 0.0;
  double selected_full_mass = 0.0;
  double coverage = 0.0;  // fraction of {f != 0} volume inside some family cube
  std::size_t full_records = 0;
  std::size_t boundary_flagged = 0;  // full selected cubes with > 5% mixed cells

  double nodal_measure = 0.0;
  double w1 = 0.0;
  bool transport_computed = false;
  std::vector<CrossoverRow> crossover;

  std::vector<InequalityRow> rows;

  const InequalityRow* row(const std::string& name) const;
  double no_bracket_fraction() const noexcept {
    return candidates ? static_cast<double>(no_bracket) / static_cast<double>(candidates) : 0.0;
  }
  bool all_hold() const;
};

// Runs the full construction on a mean-zero cube-grid function and evaluates
// every inequality of the chain. Throws DimensionError on torus grids and
// MassMismatch if f is not mean-zero.
DecompositionReport verify_chain(const GridFunction& f, const DecompositionOptions& options = {});

std::string report_json(const DecompositionReport& report);
void write_cubes_csv(const DecompositionReport& report, std::ostream& out);

}  // namespace ntlab
