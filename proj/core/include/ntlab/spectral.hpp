#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "ntlab/grid.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

using Frequency = std::array<int, 3>;

// Laplace eigenvalue 4 pi^2 |k|^2 of the frequency k on the flat torus.
double eigenvalue(const Frequency& k);

// Real orthonormal eigenbasis of T^d: phi_0 = 1, sqrt(2) cos(2 pi k.x) for
// k in the upper half-lattice (first nonzero component positive) and
// sqrt(2) sin(2 pi (-k).x) for k in the lower half.
bool upper_half(const Frequency& k, int dim) noexcept;
double basis_eval(const Frequency& k, const Point& x, int dim);

struct EigenExpansion {
  int dim = 1;
  std::map<Frequency, double> coefficients;

  // Largest |k_i| over stored frequencies.
  int max_frequency() const;
  // Smallest eigenvalue with a nonzero coefficient; infinity when empty.
  double min_eigenvalue() const;
};

// Samples sum a_k phi_k on the n^d torus grid. Throws Aliasing when
// n < 4 max|k|, DimensionError unless d is 1 or 2, MassMismatch for a
// nonzero constant term.
GridFunction synthesize(const EigenExpansion& e, int n);

// i.i.d. standard normal coefficients on every k with L <= 4 pi^2 |k|^2 <= 4L.
EigenExpansion random_annulus(int dim, double L, std::uint64_t seed);

// 1 on [0, 1/4], 0 on [3/4, inf), quintic bridge with matched first and
// second derivatives in between.
double cutoff(double t);

// B_L(x, y) = sum over lambda_k < L of a(lambda_k / L) phi_k(x) phi_k(y),
// a function of z = x - y on the torus.
class BochnerRieszKernel {
 public:
  struct Mode {
    Frequency k{0, 0, 0};  // upper half-lattice
    double weight = 0.0;   // a(lambda_k / L)
  };

  BochnerRieszKernel(int dim, double L);

  int dim() const noexcept { return dim_; }
  double L() const noexcept { return L_; }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  int max_frequency() const noexcept { return max_frequency_; }

  double eval(const Point& z) const;
  double eval(const Point& x, const Point& y) const;
  // Values at the offsets j / m for j in [0, m)^d, row-major.
  std::vector<double> offset_table(int m) const;
  // Grid quadrature h^d sum_y B(x - y) g(y) over a torus grid.
  GridFunction apply(const GridFunction& g) const;
  // Grid quadrature of B(x, .) on the n^d torus grid.
  double row_integral(const Point& x, int n) const;

 private:
  int dim_;
  double L_;
  int max_frequency_ = 0;
  std::vector<Mode> modes_;
};

// Factorized form of rho_L = B_L(x, y) f(x) dV dV + sigma, with sigma the
// diagonal copy of f^- dV. Its transport cost is
// ||f||_1 * h^d sum_z |B_L(z)| d(0, z) because d(x, y) depends on x - y only.
struct SturmPlan {
  double cost = 0.0;
  double l1 = 0.0;
  double kernel_mass = 0.0;    // h^d sum_z B_L(z)
  double kernel_moment = 0.0;  // h^d sum_z |B_L(z)| d(0, z)
  // Largest per-atom deviation of the first term's marginals from f dV and 0.
  double first_marginal_deviation = 0.0;
  double second_marginal_deviation = 0.0;
};

// Throws DimensionError for non-torus or mismatched grids and
// MarginalViolation when a marginal identity fails by more than `tolerance`.
SturmPlan sturm_plan(const GridFunction& f, const BochnerRieszKernel& kernel,
                     double tolerance = 1e-8);

// Explicit rho_L on grid-atom pairs, verified against (f^+ dV, f^- dV).
// Refuses grids with more than `max_atoms` nodes.
SignedPlan build_rho_L(const GridFunction& f, const BochnerRieszKernel& kernel,
                       double tolerance = 1e-8, std::size_t max_atoms = 4096);

// Sum of |mass| * torus distance.
double plan_cost(const SignedPlan& plan);

struct DecayFit {
  double L = 0.0;
  int dim = 1;
  double exponent = 0.0;  // slope of log envelope vs log(sqrt(L) r)
  double r2 = 0.0;
  std::vector<double> r;
  std::vector<double> envelope;  // max |B_L(z)| over d(0, z) >= r
};

// Fits the decay of B_L over r in [3 / sqrt(L), 0.4] using the monotone
// envelope of |B_L| sampled on an m^d offset grid.
DecayFit kernel_decay(const BochnerRieszKernel& kernel, int samples = 40, int m = 0);

// (r, B_L(r e_1)) on `samples` equispaced r in [0, 1/2].
void write_kernel_profile_csv(const BochnerRieszKernel& kernel, int samples, std::ostream& out);

struct ScalingOptions {
  int dim = 1;
  int n = 1024;
  std::vector<double> L;
  int trials = 1;
  std::uint64_t seed = 1;
  SolverOptions solver;
};

struct ScalingRow {
  double L = 0.0;
  double l1 = 0.0;
  double w1 = 0.0;         // trial mean
  double plan_cost = 0.0;  // trial mean
  double ratio = 0.0;      // w1 sqrt(L) / l1
  double slope = 0.0;      // log-log slope of w1 vs L over rows so far; NaN for the first
  double min_cost_margin = 0.0;  // min over trials of plan_cost - w1
  double max_marginal_deviation = 0.0;
};

struct ScalingResult {
  int dim = 1;
  int n = 0;
  std::vector<ScalingRow> rows;
  double slope = 0.0;
  double ratio_spread = 0.0;  // max ratio / min ratio
  bool cost_dominates = true;
};

ScalingResult scaling_experiment(const ScalingOptions& options);
// Columns L,l1,w1_exact,plan_cost,ratio,slope.
void write_scaling_csv(const ScalingResult& result, std::ostream& out);

}  // namespace ntlab
