#include "ntlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "ntlab/error.hpp"
#include "ntlab/random.hpp"
#include "ntlab/stats.hpp"
#include "ntlab/summation.hpp"

namespace ntlab {

namespace {

using Complex = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Term {
  Frequency k{0, 0, 0};
  Complex c;
};

void require_dim(int dim) {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::DimensionError, "spectral tools need d in {1,2}");
}

// e^{2 pi i q x_i} for |q| <= K with x_i = (i + 1/2) / n (centred) or i / n.
// Phases are reduced exactly in integers before the trigonometric call.
class PhaseTable {
 public:
  PhaseTable(int n, int K, bool centred) : n_(n), K_(K), table_((2 * K + 1) * static_cast<std::size_t>(n)) {
    const long long period = 2LL * n;
    for (int q = -K; q <= K; ++q)
      for (int i = 0; i < n; ++i) {
        const long long num = static_cast<long long>(q) * (centred ? 2LL * i + 1 : 2LL * i);
        const long long r = ((num % period) + period) % period;
        const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(period);
        table_[index(q, i)] = Complex(std::cos(angle), std::sin(angle));
      }
  }
  const Complex& operator()(int q, int i) const { return table_[index(q, i)]; }

 private:
  std::size_t index(int q, int i) const {
    return static_cast<std::size_t>(q + K_) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  int n_;
  int K_;
  std::vector<Complex> table_;
};

int max_abs(const Frequency& k, int dim) {
  int m = 0;
  for (int a = 0; a < dim; ++a) m = std::max(m, std::abs(k[a]));
  return m;
}

// Re sum_k c_k e^{2 pi i k.x} on the n^d nodes, row-major.
std::vector<double> trig_sum(int dim, int n, bool centred, const std::vector<Term>& terms) {
  int K = 0;
  for (const Term& t : terms) K = std::max(K, max_abs(t.k, dim));
  const PhaseTable E(n, K, centred);
  std::vector<double> out(static_cast<std::size_t>(dim == 1 ? n : n * n), 0.0);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (const Term& t : terms) s += (t.c * E(t.k[0], i)).real();
      out[i] = s;
    }
    return out;
  }
  // G(q, j) = sum over k with k_0 = q of c_k e^{2 pi i k_1 y_j}.
  std::vector<Complex> G((2 * K + 1) * static_cast<std::size_t>(n), Complex(0, 0));
  std::vector<char> used(2 * K + 1, 0);
  for (const Term& t : terms) {
    used[t.k[0] + K] = 1;
    Complex* row = &G[static_cast<std::size_t>(t.k[0] + K) * n];
    for (int j = 0; j < n; ++j) row[j] += t.c * E(t.k[1], j);
  }
  for (int q = -K; q <= K; ++q) {
    if (!used[q + K]) continue;
    const Complex* row = &G[static_cast<std::size_t>(q + K) * n];
    for (int i = 0; i < n; ++i) {
      const Complex e = E(q, i);
      double* dst = &out[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) dst[j] += e.real() * row[j].real() - e.imag() * row[j].imag();
    }
  }
  return out;
}

// h^d sum_x g(x) e^{-2 pi i k.x} over a torus grid for every k.
std::vector<Complex> trig_project(const GridFunction& g, const std::vector<Frequency>& ks) {
  const int n = g.n;
  int K = 0;
  for (const Frequency& k : ks) K = std::max(K, max_abs(k, g.dim));
  const PhaseTable E(n, K, true);
  const double h = g.h();
  std::vector<Complex> out(ks.size());
  if (g.dim == 1) {
    for (std::size_t m = 0; m < ks.size(); ++m) {
      Complex s(0, 0);
      for (int i = 0; i < n; ++i) s += g.values[i] * std::conj(E(ks[m][0], i));
      out[m] = s * h;
    }
    return out;
  }
  // P(q, i) = sum_j g(i, j) e^{-2 pi i q y_j}.
  std::vector<Complex> P((2 * K + 1) * static_cast<std::size_t>(n), Complex(0, 0));
  std::vector<char> done(2 * K + 1, 0);
  for (const Frequency& k : ks) {
    const int q = k[1];
    if (done[q + K]) continue;
    done[q + K] = 1;
    Complex* row = &P[static_cast<std::size_t>(q + K) * n];
    for (int i = 0; i < n; ++i) {
      const double* src = &g.values[static_cast<std::size_t>(i) * n];
      Complex s(0, 0);
      for (int j = 0; j < n; ++j) s += src[j] * std::conj(E(q, j));
      row[i] = s;
    }
  }
  for (std::size_t m = 0; m < ks.size(); ++m) {
    const Complex* row = &P[static_cast<std::size_t>(ks[m][1] + K) * n];
    Complex s(0, 0);
    for (int i = 0; i < n; ++i) s += std::conj(E(ks[m][0], i)) * row[i];
    out[m] = s * (h * h);
  }
  return out;
}

double torus_norm(const Point& z) { return distance(Point{0, 0, 0}, z, Metric::Torus); }

}  // namespace

double eigenvalue(const Frequency& k) {
  const double s = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                   static_cast<double>(k[2]) * k[2];
  return kTwoPi * kTwoPi * s;
}

bool upper_half(const Frequency& k, int dim) noexcept {
  for (int a = 0; a < dim; ++a) {
    if (k[a] > 0) return true;
    if (k[a] < 0) return false;
  }
  return false;
}

double basis_eval(const Frequency& k, const Point& x, int dim) {
  double dot = 0.0;
  for (int a = 0; a < dim; ++a) dot += k[a] * x[a];
  if (max_abs(k, dim) == 0) return 1.0;
  if (upper_half(k, dim)) return std::numbers::sqrt2 * std::cos(kTwoPi * dot);
  return std::numbers::sqrt2 * std::sin(-kTwoPi * dot);
}

int EigenExpansion::max_frequency() const {
  int m = 0;
  for (const auto& [k, a] : coefficients) m = std::max(m, max_abs(k, dim));
  return m;
}

double EigenExpansion::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [k, a] : coefficients)
    if (a != 0.0) m = std::min(m, eigenvalue(k));
  return m;
}

GridFunction synthesize(const EigenExpansion& e, int n) {
  require_dim(e.dim);
  if (n < 4 * e.max_frequency())
    throw Error(ErrorCode::Aliasing, "grid of " + std::to_string(n) + " nodes per axis below 4 * max|k| = " +
                                         std::to_string(4 * e.max_frequency()));
  GridFunction f(e.dim, n, true);
  std::map<Frequency, Complex> collected;
  for (const auto& [k, a] : e.coefficients) {
    if (a == 0.0) continue;
    if (max_abs(k, e.dim) == 0) throw Error(ErrorCode::MassMismatch, "constant mode must vanish");
    if (upper_half(k, e.dim)) {
      collected[k] += Complex(std::numbers::sqrt2 * a, 0.0);
    } else {
      // sin(t) = Re(-i e^{it}) on the mirrored frequency.
      collected[{-k[0], -k[1], -k[2]}] += Complex(0.0, -std::numbers::sqrt2 * a);
    }
  }
  std::vector<Term> terms;
  for (const auto& [k, c] : collected) terms.push_back({k, c});
  if (!terms.empty()) f.values = trig_sum(e.dim, n, true, terms);
  return f;
}

EigenExpansion random_annulus(int dim, double L, std::uint64_t seed) {
  require_dim(dim);
  if (!(L > 0.0)) throw Error(ErrorCode::NonPositive, "annulus needs L > 0");
  EigenExpansion e;
  e.dim = dim;
  CounterRng rng(seed, 0x616e6e75);
  std::normal_distribution<double> normal;
  const int K = static_cast<int>(std::ceil(std::sqrt(4.0 * L) / kTwoPi)) + 1;
  const int K1 = dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K1; b <= K1; ++b) {
      const Frequency k{a, b, 0};
      const double lam = eigenvalue(k);
      // Relative slack keeps lattice points on the rims when L = 4 pi^2 m^2.
      if (lam >= L * (1 - 1e-12) && lam <= 4.0 * L * (1 + 1e-12)) e.coefficients[k] = normal(rng);
    }
  return e;
}

double cutoff(double t) {
  if (t <= 0.25) return 1.0;
  if (t >= 0.75) return 0.0;
  const double s = (t - 0.25) / 0.5;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

BochnerRieszKernel::BochnerRieszKernel(int dim, double L) : dim_(dim), L_(L) {
  require_dim(dim);
  if (!(L > 0.0)) throw Error(ErrorCode::NonPositive, "kernel needs L > 0");
  const int K = static_cast<int>(std::sqrt(L) / kTwoPi) + 1;
  const int K1 = dim == 2 ? K : 0;
  for (int a = 0; a <= K; ++a)
    for (int b = -K1; b <= K1; ++b) {
      const Frequency k{a, b, 0};
      if (!upper_half(k, dim)) continue;
      const double lam = eigenvalue(k);
      if (lam >= L) continue;
      const double w = cutoff(lam / L);
      if (w == 0.0) continue;
      modes_.push_back({k, w});
      max_frequency_ = std::max(max_frequency_, max_abs(k, dim));
    }
}

double BochnerRieszKernel::eval(const Point& z) const {
  CompensatedSum s;
  s += 1.0;
  for (const Mode& m : modes_) {
    double dot = 0.0;
    for (int a = 0; a < dim_; ++a) dot += m.k[a] * z[a];
    s += 2.0 * m.weight * std::cos(kTwoPi * dot);
  }
  return s.value();
}

double BochnerRieszKernel::eval(const Point& x, const Point& y) const {
  return eval(Point{x[0] - y[0], x[1] - y[1], x[2] - y[2]});
}

std::vector<double> BochnerRieszKernel::offset_table(int m) const {
  std::vector<Term> terms{{{0, 0, 0}, Complex(1, 0)}};
  for (const Mode& md : modes_) terms.push_back({md.k, Complex(2.0 * md.weight, 0)});
  return trig_sum(dim_, m, false, terms);
}

GridFunction BochnerRieszKernel::apply(const GridFunction& g) const {
  if (!g.periodic || g.dim != dim_)
    throw Error(ErrorCode::DimensionError, "kernel acts on torus grids of its own dimension");
  std::vector<Frequency> ks{{0, 0, 0}};
  for (const Mode& m : modes_) ks.push_back(m.k);
  const std::vector<Complex> hat = trig_project(g, ks);
  std::vector<Term> terms;
  terms.push_back({ks[0], Complex(hat[0].real(), 0)});
  for (std::size_t i = 0; i < modes_.size(); ++i) terms.push_back({ks[i + 1], 2.0 * modes_[i].weight * hat[i + 1]});
  return GridFunction(dim_, g.n, true, trig_sum(dim_, g.n, true, terms));
}

double BochnerRieszKernel::row_integral(const Point& x, int n) const {
  const GridFunction grid(dim_, n, true);
  CompensatedSum s;
  for (std::size_t j = 0; j < grid.size(); ++j) s += eval(x, grid.point(j));
  return s.value() * std::pow(grid.h(), dim_);
}

SturmPlan sturm_plan(const GridFunction& f, const BochnerRieszKernel& kernel, double tolerance) {
  f.validate();
  if (!f.periodic || f.dim != kernel.dim())
    throw Error(ErrorCode::DimensionError, "signed plan needs a torus grid of the kernel's dimension");
  const int n = f.n;
  const double dv = std::pow(f.h(), f.dim);
  const std::vector<double> table = kernel.offset_table(n);

  SturmPlan plan;
  CompensatedSum mass, moment, l1;
  for (std::size_t j = 0; j < table.size(); ++j) {
    Point z{0, 0, 0};
    if (f.dim == 1) {
      z[0] = static_cast<double>(j) / n;
    } else {
      z[0] = static_cast<double>(j / n) / n;
      z[1] = static_cast<double>(j % n) / n;
    }
    mass += table[j];
    moment += std::abs(table[j]) * torus_norm(z);
  }
  plan.kernel_mass = mass.value() * dv;
  plan.kernel_moment = moment.value() * dv;

  double fmax = 0.0;
  for (double v : f.values) {
    l1 += std::abs(v);
    fmax = std::max(fmax, std::abs(v));
  }
  plan.l1 = l1.value() * dv;
  plan.first_marginal_deviation = fmax * dv * std::abs(plan.kernel_mass - 1.0);
  const GridFunction bf = kernel.apply(f);
  double second = 0.0;
  for (double v : bf.values) second = std::max(second, std::abs(v) * dv);
  plan.second_marginal_deviation = second;
  plan.cost = plan.l1 * plan.kernel_moment;

  const double worst = std::max(plan.first_marginal_deviation, plan.second_marginal_deviation);
  if (!(worst <= tolerance))
    throw Error(ErrorCode::MarginalViolation,
                "kernel plan marginal off by " + std::to_string(worst) + " per atom");
  return plan;
}

SignedPlan build_rho_L(const GridFunction& f, const BochnerRieszKernel& kernel, double tolerance,
                       std::size_t max_atoms) {
  f.validate();
  if (!f.periodic || f.dim != kernel.dim())
    throw Error(ErrorCode::DimensionError, "signed plan needs a torus grid of the kernel's dimension");
  if (f.size() > max_atoms)
    throw Error(ErrorCode::DimensionError, "explicit plan limited to " + std::to_string(max_atoms) + " atoms");
  const int n = f.n;
  const double dv = std::pow(f.h(), f.dim);
  const std::vector<double> table = kernel.offset_table(n);
  const auto offset = [&](std::size_t x, std::size_t y) {
    const auto ix = f.unflatten(x), iy = f.unflatten(y);
    std::size_t flat = 0;
    for (int a = 0; a < f.dim; ++a) flat = flat * n + static_cast<std::size_t>((ix[a] - iy[a] + n) % n);
    return flat;
  };

  SignedPlan plan;
  plan.dim = f.dim;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double fx = f.values[x];
    if (fx == 0.0) continue;
    const Point px = f.point(x);
    for (std::size_t y = 0; y < f.size(); ++y)
      plan.entries.push_back({px, f.point(y), table[offset(x, y)] * fx * dv * dv});
    if (fx < 0.0) plan.entries.push_back({px, px, -fx * dv});
  }
  if (plan.entries.empty()) return plan;
  const double dev = marginal_deviation(plan, to_measure(f, Sign::Plus), to_measure(f, Sign::Minus));
  if (!(dev <= tolerance))
    throw Error(ErrorCode::MarginalViolation, "kernel plan marginal off by " + std::to_string(dev) + " per atom");
  return plan;
}

double plan_cost(const SignedPlan& plan) { return signed_plan_cost(plan, 1.0, Metric::Torus); }

DecayFit kernel_decay(const BochnerRieszKernel& kernel, int samples, int m) {
  const int d = kernel.dim();
  const double L = kernel.L();
  const double lo = 3.0 / std::sqrt(L), hi = 0.4;
  if (!(lo < hi)) throw Error(ErrorCode::EmptySupport, "decay fit range [3/sqrt(L), 0.4] is empty");
  if (samples < 2) throw Error(ErrorCode::DimensionError, "decay fit needs two or more samples");
  if (m <= 0) m = d == 1 ? 1 << 16 : 512;
  const std::vector<double> table = kernel.offset_table(m);

  std::vector<std::pair<double, double>> pts(table.size());
  for (std::size_t j = 0; j < table.size(); ++j) {
    Point z{0, 0, 0};
    if (d == 1) {
      z[0] = static_cast<double>(j) / m;
    } else {
      z[0] = static_cast<double>(j / m) / m;
      z[1] = static_cast<double>(j % m) / m;
    }
    pts[j] = {torus_norm(z), std::abs(table[j])};
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 1; j < pts.size(); ++j) pts[j].second = std::max(pts[j].second, pts[j - 1].second);

  DecayFit fit;
  fit.L = L;
  fit.dim = d;
  std::vector<double> scaled;
  for (int s = 0; s < samples; ++s) {
    const double r = lo * std::pow(hi / lo, static_cast<double>(s) / (samples - 1));
    // Last point with distance >= r carries the running maximum.
    const auto it = std::partition_point(pts.begin(), pts.end(), [r](const auto& p) { return p.first >= r; });
    const double env = it == pts.begin() ? 0.0 : std::prev(it)->second;
    fit.r.push_back(r);
    fit.envelope.push_back(env);
    scaled.push_back(std::sqrt(L) * r);
  }
  const LineFit line = fit_loglog(scaled, fit.envelope);
  fit.exponent = line.slope;
  fit.r2 = line.r2;
  return fit;
}

void write_kernel_profile_csv(const BochnerRieszKernel& kernel, int samples, std::ostream& out) {
  out << "r,B_L\n" << std::setprecision(17);
  for (int s = 0; s < samples; ++s) {
    const double r = samples > 1 ? 0.5 * s / (samples - 1) : 0.0;
    out << r << ',' << kernel.eval(Point{r, 0, 0}) << '\n';
  }
}

ScalingResult scaling_experiment(const ScalingOptions& options) {
  require_dim(options.dim);
  if (options.L.empty() || options.trials < 1)
    throw Error(ErrorCode::ConfigError, "scaling sweep needs L values and trials >= 1");
  ScalingResult result;
  result.dim = options.dim;
  result.n = options.n;
  std::vector<double> Ls, w1s;
  for (std::size_t li = 0; li < options.L.size(); ++li) {
    const double L = options.L[li];
    const BochnerRieszKernel kernel(options.dim, L);
    ScalingRow row;
    row.L = L;
    row.min_cost_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < options.trials; ++t) {
      CounterRng stream = CounterRng(options.seed, li).fork(static_cast<std::uint64_t>(t));
      const EigenExpansion e = random_annulus(options.dim, L, stream());
      GridFunction f = synthesize(e, options.n);
      f = scaled(f, 1.0 / norms(f).l1);
      const double w1 =
          w1_exact(to_measure(f, Sign::Plus), to_measure(f, Sign::Minus), Metric::Torus, options.solver).cost;
      const SturmPlan sp = sturm_plan(f, kernel);
      row.l1 += sp.l1 / options.trials;
      row.w1 += w1 / options.trials;
      row.plan_cost += sp.cost / options.trials;
      row.min_cost_margin = std::min(row.min_cost_margin, sp.cost - w1);
      row.max_marginal_deviation = std::max(
          {row.max_marginal_deviation, sp.first_marginal_deviation, sp.second_marginal_deviation});
    }
    row.ratio = row.w1 * std::sqrt(L) / row.l1;
    Ls.push_back(L);
    w1s.push_back(row.w1);
    row.slope = Ls.size() > 1 ? fit_loglog(Ls, w1s).slope : std::numeric_limits<double>::quiet_NaN();
    result.cost_dominates = result.cost_dominates && row.min_cost_margin >= 0.0;
    result.rows.push_back(row);
  }
  result.slope = result.rows.back().slope;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const ScalingRow& r : result.rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  result.ratio_spread = hi / lo;
  return result;
}

void write_scaling_csv(const ScalingResult& result, std::ostream& out) {
  out << "L,l1,w1_exact,plan_cost,ratio,slope\n" << std::setprecision(17);
  for (const ScalingRow& r : result.rows) {
    out << r.L << ',' << r.l1 << ',' << r.w1 << ',' << r.plan_cost << ',' << r.ratio << ',';
    if (std::isnan(r.slope))
      out << "nan";
    else
      out << r.slope;
    out << '\n';
  }
}

}  // namespace ntlab
