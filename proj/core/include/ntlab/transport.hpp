#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlab/geometry.hpp"
#include "ntlab/grid.hpp"

namespace ntlab {

struct PlanEntry {
  std::size_t src = 0;
  std::size_t dst = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  std::size_t src_count = 0;
  std::size_t dst_count = 0;
  Metric metric = Metric::Euclidean;

  std::vector<double> row_sums() const;
  std::vector<double> column_sums() const;
  double cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
  // Largest marginal deviation relative to the total mass.
  double marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
};

struct SolverOptions {
  // Instances with at most this many source-sink pairs use the complete
  // bipartite graph; larger ones use multiscale column generation.
  std::size_t dense_pair_limit = 4'500'000;
  int nearest_arcs = 1;
  // Violated arcs added per atom in each column generation round.
  int arcs_per_query = 16;
  // Integer resolution of distances in the flow network.
  double cost_resolution = 68719476736.0;  // 2^36
  // Total mass is rescaled to this many flow units.
  double mass_units = 1e12;
};

struct SolveStats {
  bool dense = true;
  int levels = 0;
  int pricing_rounds = 0;
  std::size_t arcs = 0;
  std::uint64_t pivots = 0;
};

struct W1Result {
  double cost = 0.0;
  TransportPlan plan;
  // Kantorovich potentials in distance units: h(x_s) - h(y_t) <= d(x_s, y_t)
  // on every pair, with equality on the support of the plan.
  std::vector<double> src_potential;
  std::vector<double> dst_potential;
  SolveStats stats;
};

W1Result w1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                  const SolverOptions& options = {});

// Integral of |F_mu - F_nu| over the line; both measures must be 1-D.
double w1_1d_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct LipschitzPotential {
  std::vector<double> src_values;
  std::vector<double> dst_values;
};

struct DualResult {
  double value = 0.0;
  double primal = 0.0;
  double gap = 0.0;           // primal - value
  double relative_gap = 0.0;  // gap / max(primal, tiny)
  LipschitzPotential potential;
  double max_violation = 0.0;  // max of |h(a)-h(b)| - d(a,b) over checked pairs
  std::size_t pairs_checked = 0;
  bool exhaustive = true;
};

// Builds a globally 1-Lipschitz potential from the solver's dual by a
// c-transform and evaluates the dual objective.
DualResult certify(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                   const W1Result& primal);
DualResult w1_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                   const SolverOptions& options = {});
// Objective of an arbitrary potential, after checking it is 1-Lipschitz on
// the supports.
double dual_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                  const LipschitzPotential& potential, double* max_violation = nullptr);

struct EntropicOptions {
  int max_iterations = 200000;
  double tolerance = 1e-9;  // relative L1 marginal error
  double scaling_factor = 0.5;
};

struct EntropicResult {
  double transport_cost = 0.0;       // <P, C> of the Sinkhorn plan
  double regularized_objective = 0.0;  // <P, C> + reg * KL(P | mu x nu)
  double rounded_cost = 0.0;         // cost of the feasible rounded plan
  double marginal_error = 0.0;
  int iterations = 0;
};

EntropicResult w1_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                           double reg, const EntropicOptions& options = {});

struct SignedEntry {
  Point src{0.0, 0.0, 0.0};
  Point dst{0.0, 0.0, 0.0};
  double mass = 0.0;
};

struct SignedPlan {
  int dim = 1;
  std::vector<SignedEntry> entries;
};

struct SignedMarginals {
  DiscreteMeasure first;   // signed weights allowed
  DiscreteMeasure second;
};

// Marginals aggregated by exact point coordinates; zero atoms are dropped.
SignedMarginals signed_marginals(const SignedPlan& plan);
// Largest per-atom deviation of the plan marginals from (mu, nu).
double marginal_deviation(const SignedPlan& plan, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu);

// Sum of |mass| * d^p; unchecked.
double signed_plan_cost(const SignedPlan& plan, double p, Metric metric = Metric::Euclidean);
// Same, after verifying the marginals equal (mu, nu) within 1e-9 per atom.
double signed_plan_cost(const SignedPlan& plan, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu, double p, Metric metric = Metric::Euclidean);

// Signed plan on the line with marginals delta_0 and delta_1 whose p-cost is
// (2n)^(1-p).
SignedPlan staircase_plan(int n);
DiscreteMeasure dirac(double x, int dim = 1);

struct PlanHeader {
  double cost = 0.0;
  double gap = 0.0;
  Metric metric = Metric::Euclidean;
  std::size_t src_atoms = 0;
  std::size_t dst_atoms = 0;
};

void write_plan_csv(const TransportPlan& plan, std::ostream& out);
std::string plan_header_json(const PlanHeader& header);
void save_plan(const TransportPlan& plan, const PlanHeader& header, const std::string& stem);

}  // namespace ntlab
