#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ntlab/config.hpp"
#include "ntlab/decomposition.hpp"
#include "ntlab/grid.hpp"
#include "ntlab/spectral.hpp"
#include "ntlab/table.hpp"

namespace ntlab {

enum class SolverChoice { Exact, Entropic };

struct ExperimentConfig {
  std::string experiment;
  int dim = 2;
  int n = 256;
  std::uint64_t seed = 1;
  SolverChoice solver = SolverChoice::Exact;
  double reg = 0.01;  // entropic regularization in distance units

  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  std::vector<double> alphas{0.5, 1.0, 1.5};
  std::vector<double> L_over_4pi2;  // sturm-scaling: L = 4 pi^2 * value
  std::vector<double> p_values{1.0, 1.25, 1.5, 2.0, 3.0};
  std::vector<int> staircase_n{1, 10, 100, 10000};
  int trials = 1;
  int min_modes = 2;  // uncertainty: cosine modes per axis drawn from [min_modes, max_modes]
  int max_modes = 10;
  bool include_fixed = true;  // uncertainty: add sin(2 pi x) sin(2 pi y) and epsilon = 0.05

  std::string function = "sine";  // decompose: sine | epsilon
  double epsilon = 0.1;
  TransportMode transport = TransportMode::Exact;
  std::size_t max_centers = 10000;
};

// Reads the keys relevant to `experiment` and rejects unknown ones.
ExperimentConfig experiment_config(const KeyValueConfig& kv, const std::string& experiment);

// Antisymmetric profile: -eps^2 up to 1/2 - eps, a linear spike down to
// -1/eps at 1/2 - eps/2, up through 0 at 1/2 to 1/eps at 1/2 + eps/2, back
// to eps^2 at 1/2 + eps and constant after.
double epsilon_profile(double t, double eps);
// f(x) = profile(x_d) on the cube grid, antisymmetric about x_d = 1/2 node by node.
GridFunction epsilon_family(int dim, int n, double eps);

// W1 * H^{d-1}(Z) * (linf / l1)^alpha / l1.
double uncertainty_product(double w1, double nodal, double linf, double l1, double alpha);

struct EpsilonRow {
  double eps = 0.0;
  double linf = 0.0;
  double l1 = 0.0;
  double nodal = 0.0;
  double w1 = 0.0;               // exact, from the x_d marginals
  double reflection_cost = 0.0;  // 2 sum (x_d - 1/2) f^+ dV
  double dual_bound = 0.0;       // sum (x_d - 1/2) (f^+ - f^-) dV
  std::vector<double> products;  // one per alpha
};

struct EpsilonResult {
  int dim = 2;
  int n = 0;
  std::vector<double> alphas;
  std::vector<EpsilonRow> rows;
  double linf_eps_spread = 0.0;  // max/min of linf * eps
  double w1_eps_spread = 0.0;    // max/min of w1 / eps
  std::vector<double> product_drop;    // per alpha: first row / last row
  std::vector<double> product_spread;  // per alpha: max/min
};

EpsilonResult run_epsilon_family(const ExperimentConfig& cfg);

// Random Neumann cosine field sum a_k cos(pi k_1 x) cos(pi k_2 y) over
// 0 < |k|_inf <= modes, i.i.d. standard normal a_k, on the cube grid.
GridFunction random_cosine_field(int dim, int n, int modes, std::uint64_t seed);

struct UncertaintyRow {
  std::string label;
  std::uint64_t seed = 0;
  int modes = 0;
  double w1 = 0.0;
  double nodal = 0.0;
  double linf = 0.0;
  double l1 = 0.0;
  double product = 0.0;     // exponent 2 - 1/d
  double product_sb = 0.0;  // W1 H linf / l1^2
};

struct UncertaintyResult {
  int dim = 2;
  int n = 0;
  std::vector<UncertaintyRow> rows;
  std::size_t random_rows = 0;
  double min_product = 0.0;
  std::string argmin;
  double min_product_sb = 0.0;
  bool all_positive = true;
};

UncertaintyResult run_uncertainty_suite(const ExperimentConfig& cfg);

struct StaircaseRow {
  int n = 0;
  double p = 1.0;
  double cost = 0.0;
  double predicted = 0.0;   // (2n)^(1-p)
  double normalized = 0.0;  // cost * (2n)^(p-1)
};

struct StaircaseResult {
  std::vector<StaircaseRow> rows;
  double max_normalized_error = 0.0;
};

StaircaseResult run_staircase(const ExperimentConfig& cfg);

struct SturmResult {
  ScalingResult scaling;
  std::vector<double> log_rate_ratio;  // w1 / sqrt(log L / L)
};

SturmResult run_sturm_scaling(const ExperimentConfig& cfg);

DecompositionReport run_decomposition_demo(const ExperimentConfig& cfg);

struct ExperimentOutput {
  std::vector<std::pair<std::string, std::string>> files;  // relative name, content
  std::string summary_json;
};

ExperimentOutput render(const EpsilonResult& r);
ExperimentOutput render(const UncertaintyResult& r);
ExperimentOutput render(const StaircaseResult& r);
ExperimentOutput render(const SturmResult& r);
ExperimentOutput render(const DecompositionReport& r);

// Writes every file plus manifest.json (config echo, version, seed, wall time).
void write_experiment(const std::string& dir, const std::string& experiment, const KeyValueConfig& kv,
                      const ExperimentConfig& cfg, const ExperimentOutput& output, double wall_seconds);

}  // namespace ntlab
