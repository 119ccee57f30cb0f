#include "ntlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>

#include "ntlab/error.hpp"
#include "ntlab/network_simplex.hpp"
#include "ntlab/random.hpp"
#include "ntlab/spatial_index.hpp"
#include "ntlab/summation.hpp"

namespace ntlab {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> r(src_count, 0.0);
  for (const auto& e : entries) r[e.src] += e.mass;
  return r;
}

std::vector<double> TransportPlan::column_sums() const {
  std::vector<double> c(dst_count, 0.0);
  for (const auto& e : entries) c[e.dst] += e.mass;
  return c;
}

double TransportPlan::cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
  CompensatedSum s;
  for (const auto& e : entries) s += e.mass * distance(mu.points[e.src], nu.points[e.dst], metric);
  return s.value();
}

double TransportPlan::marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
  const auto r = row_sums();
  const auto c = column_sums();
  double err = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) err = std::max(err, std::abs(r[i] - mu.weights[i]));
  for (std::size_t j = 0; j < c.size(); ++j) err = std::max(err, std::abs(c[j] - nu.weights[j]));
  return err / std::max(mu.total, std::numeric_limits<double>::min());
}

namespace {

using Cost = NetworkSimplex::Cost;
using Flow = NetworkSimplex::Flow;

// Round-half-up of a non-negative scaled distance.
inline Cost quantize(double x) noexcept { return static_cast<Cost>(x + 0.5); }

void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.empty() || nu.empty()) throw Error(ErrorCode::EmptySupport, "measure has no atoms");
  if (mu.dim != nu.dim) throw Error(ErrorCode::DimensionError, "measures live in different dimensions");
  if (std::abs(mu.total - nu.total) > 1e-9 * std::max(mu.total, nu.total))
    throw Error(ErrorCode::MassMismatch, "total masses differ beyond 1e-9 relative");
}

// Rounds weights to integers summing exactly to `units`; the rounding residue
// goes to the heaviest atom.
std::vector<Flow> integer_masses(const std::vector<double>& w, double factor, Flow units) {
  std::vector<Flow> out(w.size());
  Flow sum = 0;
  std::size_t heaviest = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::llround(w[i] * factor);
    sum += out[i];
    if (w[i] > w[heaviest]) heaviest = i;
  }
  out[heaviest] += units - sum;
  if (out[heaviest] < 0) throw Error(ErrorCode::MassMismatch, "mass rounding failed");
  return out;
}

double diameter_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric) {
  if (metric == Metric::Torus) return 0.5 * std::sqrt(static_cast<double>(mu.dim)) + 1e-12;
  Point lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -lo[a];
  }
  for (const auto* m : {&mu, &nu})
    for (const auto& p : m->points)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
  double s = 0.0;
  for (int a = 0; a < 3; ++a) s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(s) + 1e-12;
}

struct FlowProblem {
  const DiscreteMeasure& mu;
  const DiscreteMeasure& nu;
  Metric metric;
  double res;
  double factor;
  std::vector<Flow> supply;
  Cost max_cost;

  FlowProblem(const DiscreteMeasure& m, const DiscreteMeasure& n, Metric met, const SolverOptions& opt)
      : mu(m), nu(n), metric(met), res(opt.cost_resolution) {
    factor = opt.mass_units / mu.total;
    const auto units = static_cast<Flow>(std::llround(opt.mass_units));
    auto a = integer_masses(mu.weights, factor, units);
    auto b = integer_masses(nu.weights, factor, units);
    supply.reserve(a.size() + b.size());
    for (Flow x : a) supply.push_back(x);
    for (Flow x : b) supply.push_back(-x);
    max_cost = static_cast<Cost>(std::ceil(diameter_bound(mu, nu, metric) * res)) + 1;
  }

  int ns() const { return static_cast<int>(mu.size()); }
  Cost cost(int s, int t) const { return quantize(distance(mu.points[s], nu.points[t], metric) * res); }
};

W1Result extract(const FlowProblem& fp, const NetworkSimplex& net, SolveStats stats) {
  if (net.artificial_flow() != 0)
    throw Error(ErrorCode::InfeasibleMarginals, "flow network left mass on artificial arcs");
  W1Result r;
  r.plan.src_count = fp.mu.size();
  r.plan.dst_count = fp.nu.size();
  r.plan.metric = fp.metric;
  const int ns = fp.ns();
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const Flow f = net.flow(a);
    if (f <= 0) continue;
    r.plan.entries.push_back({static_cast<std::size_t>(net.arc_source(a)),
                              static_cast<std::size_t>(net.arc_target(a) - ns),
                              static_cast<double>(f) / fp.factor});
  }
  std::sort(r.plan.entries.begin(), r.plan.entries.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return x.src != y.src ? x.src < y.src : x.dst < y.dst;
  });
  r.cost = r.plan.cost(fp.mu, fp.nu);

  // h = -pi / resolution, anchored so the first sink sits at zero.
  const Cost anchor = net.potential(ns);
  r.src_potential.resize(fp.mu.size());
  r.dst_potential.resize(fp.nu.size());
  for (int s = 0; s < ns; ++s)
    r.src_potential[s] = -static_cast<double>(net.potential(s) - anchor) / fp.res;
  for (std::size_t t = 0; t < fp.nu.size(); ++t)
    r.dst_potential[t] = -static_cast<double>(net.potential(ns + static_cast<int>(t)) - anchor) / fp.res;
  stats.arcs = net.arc_count();
  stats.pivots = net.pivots();
  r.stats = stats;
  return r;
}

W1Result solve_dense(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                     const SolverOptions& opt) {
  FlowProblem fp(mu, nu, metric, opt);
  NetworkSimplex net(fp.supply, fp.max_cost);
  const int ns = fp.ns();
  const int nt = static_cast<int>(nu.size());
  net.reserve_arcs(static_cast<std::size_t>(ns) * nt);
  for (int s = 0; s < ns; ++s)
    for (int t = 0; t < nt; ++t) net.add_arc(s, ns + t, fp.cost(s, t));
  if (net.run() != NetworkSimplex::Status::Optimal)
    throw Error(ErrorCode::NonConvergence, "network simplex reported an unbounded cycle");
  SolveStats st;
  st.dense = true;
  return extract(fp, net, st);
}

// Cell partition used to build a coarser instance.
struct Coarsening {
  int per_axis = 1;
  std::vector<int> cell_of;  // per atom
  std::vector<std::vector<int>> members;
  DiscreteMeasure measure;
};

Coarsening coarsen(const DiscreteMeasure& m, int per_axis) {
  Coarsening c;
  c.per_axis = per_axis;
  c.cell_of.resize(m.size());
  std::vector<int> slot;
  int cells = 1;
  for (int a = 0; a < m.dim; ++a) cells *= per_axis;
  slot.assign(cells, -1);
  c.measure.dim = m.dim;
  for (std::size_t i = 0; i < m.size(); ++i) {
    int id = 0;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < m.dim; ++a) {
      idx[a] = std::clamp(static_cast<int>(std::floor(m.points[i][a] * per_axis)), 0, per_axis - 1);
      id = id * per_axis + idx[a];
    }
    if (slot[id] < 0) {
      slot[id] = static_cast<int>(c.members.size());
      c.members.emplace_back();
      Point p{0, 0, 0};
      for (int a = 0; a < m.dim; ++a) p[a] = (idx[a] + 0.5) / per_axis;
      c.measure.points.push_back(p);
      c.measure.weights.push_back(0.0);
    }
    const int k = slot[id];
    c.cell_of[i] = k;
    c.members[k].push_back(static_cast<int>(i));
    c.measure.weights[k] += m.weights[i];
  }
  c.measure.total = m.total;
  return c;
}

W1Result solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
               const SolverOptions& opt, int level);

struct Violation {
  Cost rc;
  int other;
};

// Branch and bound over a kd-tree for the most negative reduced costs
// c + pi_s - pi_t between a query atom with potential pi_q and the indexed
// atoms; keeps up to found.size() arcs with reduced cost below `threshold`,
// most negative first.
// sign = +1 queries a source against sinks (node_extreme holds the largest
// pi_t), sign = -1 a sink against sources (smallest pi_s).
int most_violated(const Point& z, Cost pi_q, int sign, const KdTree& tree, const std::vector<Point>& pts,
                  const std::vector<Cost>& pot, const std::vector<Cost>& node_extreme, Metric metric,
                  double res, Cost threshold, std::span<Violation> found,
                  std::vector<std::pair<double, int>>& stack) {
  // Double rounding of potentials near 2^57 stays well below this slack.
  constexpr double slack = 64.0;
  const auto& nodes = tree.nodes();
  const int cap = static_cast<int>(found.size());
  int count = 0;
  auto cutoff = [&] { return count < cap ? threshold : found[cap - 1].rc; };
  auto bound = [&](int k) {
    const Cost part = sign > 0 ? pi_q - node_extreme[k] : node_extreme[k] - pi_q;
    return res * tree.box_distance(z, k) - 0.5 + static_cast<double>(part);
  };
  stack.clear();
  stack.emplace_back(bound(0), 0);
  while (!stack.empty()) {
    const auto [lb, k] = stack.back();
    stack.pop_back();
    if (lb - slack >= static_cast<double>(cutoff())) continue;
    const auto& nd = nodes[k];
    if (nd.leaf()) {
      for (int i : tree.items(nd)) {
        const Cost c = quantize(distance(z, pts[i], metric) * res);
        const Cost rc = sign > 0 ? c + pi_q - pot[i] : c + pot[i] - pi_q;
        if (rc >= cutoff()) continue;
        int j = count < cap ? count++ : cap - 1;
        for (; j > 0 && found[j - 1].rc > rc; --j) found[j] = found[j - 1];
        found[j] = {rc, i};
      }
      continue;
    }
    const double bl = bound(nd.left), br = bound(nd.right);
    if (bl <= br) {
      stack.emplace_back(br, nd.right);
      stack.emplace_back(bl, nd.left);
    } else {
      stack.emplace_back(bl, nd.left);
      stack.emplace_back(br, nd.right);
    }
  }
  return count;
}

// Finer levels solve a sparse instance seeded from the refined coarse plan
// plus nearest neighbours, then add violated arcs until the potentials
// certify optimality over all pairs.
W1Result solve_sparse(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                      const SolverOptions& opt, int level) {
  const int ns = static_cast<int>(mu.size());
  const int nt = static_cast<int>(nu.size());
  const int d = mu.dim;
  std::vector<std::uint64_t> keys;
  auto key = [](int s, int t) { return (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(t); };

  int coarse_levels = 0;
  {
    const double atoms = static_cast<double>(ns + nt);
    const int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(atoms / 4.0, 1.0 / d))));
    Coarsening cs = coarsen(mu, per_axis);
    Coarsening ct = coarsen(nu, per_axis);
    if (cs.measure.size() < mu.size() || ct.measure.size() < nu.size()) {
      W1Result coarse = solve(cs.measure, ct.measure, metric, opt, level + 1);
      coarse_levels = coarse.stats.levels;
      for (const auto& e : coarse.plan.entries)
        for (int s : cs.members[e.src])
          for (int t : ct.members[e.dst]) keys.push_back(key(s, t));
    }
  }

  BucketGrid sink_index(nu.points, d, metric);
  BucketGrid source_index(mu.points, d, metric);
  const KdTree sink_tree(nu.points, d, metric);
  const KdTree source_tree(mu.points, d, metric);
  std::vector<Cost> max_dst, min_src;
  std::vector<std::pair<double, int>> stack;
  std::vector<Violation> found(static_cast<std::size_t>(std::max(1, opt.arcs_per_query)));
  for (int s = 0; s < ns; ++s)
    for (int t : sink_index.nearest(mu.points[s], opt.nearest_arcs)) keys.push_back(key(s, t));
  for (int t = 0; t < nt; ++t)
    for (int s : source_index.nearest(nu.points[t], opt.nearest_arcs)) keys.push_back(key(s, t));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  FlowProblem fp(mu, nu, metric, opt);
  NetworkSimplex net(fp.supply, fp.max_cost);
  net.reserve_arcs(keys.size() * 5 / 4);
  for (auto k : keys) {
    const int s = static_cast<int>(k >> 32);
    const int t = static_cast<int>(k & 0xffffffffu);
    net.add_arc(s, ns + t, fp.cost(s, t));
  }

  SolveStats st;
  st.dense = false;
  std::vector<Cost> pi_src(ns), pi_dst(nt);
  for (;;) {
    if (net.run() != NetworkSimplex::Status::Optimal)
      throw Error(ErrorCode::NonConvergence, "network simplex reported an unbounded cycle");
    ++st.pricing_rounds;
    for (int s = 0; s < ns; ++s) pi_src[s] = net.potential(s);
    for (int t = 0; t < nt; ++t) pi_dst[t] = net.potential(ns + t);
    sink_tree.aggregate(pi_dst, max_dst, std::greater<>());
    source_tree.aggregate(pi_src, min_src, std::less<>());
    keys.clear();
    for (int s = 0; s < ns; ++s) {
      const int k = most_violated(mu.points[s], pi_src[s], +1, sink_tree, nu.points, pi_dst, max_dst,
                                  metric, fp.res, 0, found, stack);
      for (int i = 0; i < k; ++i) keys.push_back(key(s, found[i].other));
    }
    for (int t = 0; t < nt; ++t) {
      const int k = most_violated(nu.points[t], pi_dst[t], -1, source_tree, mu.points, pi_src, min_src,
                                  metric, fp.res, 0, found, stack);
      for (int i = 0; i < k; ++i) keys.push_back(key(found[i].other, t));
    }
    if (keys.empty()) break;
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (auto k : keys) {
      const int s = static_cast<int>(k >> 32);
      const int t = static_cast<int>(k & 0xffffffffu);
      net.add_arc(s, ns + t, fp.cost(s, t));
    }
  }
  st.levels = coarse_levels + 1;
  return extract(fp, net, st);
}

W1Result solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
               const SolverOptions& opt, int level) {
  const std::size_t pairs = mu.size() * nu.size();
  if (pairs <= opt.dense_pair_limit) return solve_dense(mu, nu, metric, opt);
  return solve_sparse(mu, nu, metric, opt, level);
}

// min_t (h_t + d(z, y_t)) by branch and bound over a kd-tree whose nodes
// carry the smallest h below them.
double c_transform(const Point& z, const KdTree& tree, const std::vector<Point>& pts,
                   const std::vector<double>& h, const std::vector<double>& node_min,
                   Metric metric, std::vector<std::pair<double, int>>& stack) {
  const auto& nodes = tree.nodes();
  double best = std::numeric_limits<double>::infinity();
  stack.clear();
  stack.emplace_back(node_min[0] + tree.box_distance(z, 0), 0);
  while (!stack.empty()) {
    const auto [lb, k] = stack.back();
    stack.pop_back();
    if (lb >= best) continue;
    const auto& nd = nodes[k];
    if (nd.leaf()) {
      for (int i : tree.items(nd)) best = std::min(best, h[i] + distance(z, pts[i], metric));
      continue;
    }
    const double bl = node_min[nd.left] + tree.box_distance(z, nd.left);
    const double br = node_min[nd.right] + tree.box_distance(z, nd.right);
    if (bl <= br) {
      stack.emplace_back(br, nd.right);
      stack.emplace_back(bl, nd.left);
    } else {
      stack.emplace_back(bl, nd.left);
      stack.emplace_back(br, nd.right);
    }
  }
  return best;
}

}  // namespace

W1Result w1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                  const SolverOptions& options) {
  check_pair(mu, nu);
  return solve(mu, nu, metric, options, 0);
}

double w1_1d_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim != 1 || nu.dim != 1) throw Error(ErrorCode::DimensionError, "1-D oracle needs 1-D measures");
  check_pair(mu, nu);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) atoms.emplace_back(mu.points[i][0], mu.weights[i]);
  for (std::size_t i = 0; i < nu.size(); ++i) atoms.emplace_back(nu.points[i][0], -nu.weights[i]);
  std::sort(atoms.begin(), atoms.end());
  CompensatedSum cdf, area;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf += atoms[i].second;
    area += std::abs(cdf.value()) * (atoms[i + 1].first - atoms[i].first);
  }
  return area.value();
}

double dual_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                  const LipschitzPotential& potential, double* max_violation) {
  if (max_violation) {
    double worst = -std::numeric_limits<double>::infinity();
    auto at = [&](std::size_t i) -> std::pair<const Point*, double> {
      return i < mu.size() ? std::pair{&mu.points[i], potential.src_values[i]}
                           : std::pair{&nu.points[i - mu.size()], potential.dst_values[i - mu.size()]};
    };
    const std::size_t n = mu.size() + nu.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto [p, a] = at(i);
        const auto [q, b] = at(j);
        worst = std::max(worst, std::abs(a - b) - distance(*p, *q, metric));
      }
    *max_violation = worst;
  }
  CompensatedSum v;
  for (std::size_t i = 0; i < mu.size(); ++i) v += potential.src_values[i] * mu.weights[i];
  for (std::size_t j = 0; j < nu.size(); ++j) v += -potential.dst_values[j] * nu.weights[j];
  return v.value();
}

DualResult certify(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                   const W1Result& primal) {
  check_pair(mu, nu);
  const int d = mu.dim;
  const KdTree sinks(nu.points, d, metric);
  std::vector<double> node_min;
  sinks.aggregate(primal.dst_potential, node_min, std::less<>());

  DualResult r;
  r.primal = primal.cost;
  r.potential.src_values.resize(mu.size());
  r.potential.dst_values.resize(nu.size());
  std::vector<std::pair<double, int>> stack;
  for (std::size_t s = 0; s < mu.size(); ++s)
    r.potential.src_values[s] =
        c_transform(mu.points[s], sinks, nu.points, primal.dst_potential, node_min, metric, stack);
  for (std::size_t t = 0; t < nu.size(); ++t)
    r.potential.dst_values[t] =
        c_transform(nu.points[t], sinks, nu.points, primal.dst_potential, node_min, metric, stack);

  // Centre the potential so totals that differ by rounding do not bias the value.
  const double offset = r.potential.dst_values.front();
  for (double& x : r.potential.src_values) x -= offset;
  for (double& x : r.potential.dst_values) x -= offset;

  const std::size_t n = mu.size() + nu.size();
  if (n <= 500) {
    r.value = dual_value(mu, nu, metric, r.potential, &r.max_violation);
    r.pairs_checked = n * (n - 1) / 2;
    r.exhaustive = true;
  } else {
    r.value = dual_value(mu, nu, metric, r.potential, nullptr);
    CounterRng rng(0x5eed, n);
    const std::size_t samples = 200000;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
      const std::size_t i = rng() % n, j = rng() % n;
      const Point& p = i < mu.size() ? mu.points[i] : nu.points[i - mu.size()];
      const Point& q = j < mu.size() ? mu.points[j] : nu.points[j - mu.size()];
      const double a = i < mu.size() ? r.potential.src_values[i] : r.potential.dst_values[i - mu.size()];
      const double b = j < mu.size() ? r.potential.src_values[j] : r.potential.dst_values[j - mu.size()];
      worst = std::max(worst, std::abs(a - b) - distance(p, q, metric));
    }
    r.max_violation = worst;
    r.pairs_checked = samples;
    r.exhaustive = false;
  }
  r.gap = r.primal - r.value;
  r.relative_gap = r.primal > 0.0 ? r.gap / r.primal : std::abs(r.gap);
  return r;
}

DualResult w1_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                   const SolverOptions& options) {
  return certify(mu, nu, metric, w1_exact(mu, nu, metric, options));
}

}  // namespace ntlab
