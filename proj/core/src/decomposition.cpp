#include "ntlab/decomposition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "json.hpp"
#include "ntlab/error.hpp"
#include "ntlab/random.hpp"
#include "ntlab/summation.hpp"

namespace ntlab {

namespace {

double pow5(int dim) { return std::pow(5.0, dim); }

bool centre_inside(const Point& p, const CubeRecord& q, int dim) {
  for (int k = 0; k < dim; ++k)
    if (!(std::abs(p[k] - q.center[k]) < 0.5 * q.side)) return false;
  return true;
}

double overlap_volume(const CubeRecord& a, const CubeRecord& b, int dim) {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) {
    const double lo = std::max(a.center[k] - 0.5 * a.side, b.center[k] - 0.5 * b.side);
    const double hi = std::min(a.center[k] + 0.5 * a.side, b.center[k] + 0.5 * b.side);
    if (hi <= lo) return 0.0;
    v *= hi - lo;
  }
  return v;
}

// Grid nodes strictly inside an open cube, per axis.
void node_range(const GridFunction& f, const CubeRegion& q, int axis, int& lo, int& hi) {
  const double h = f.h();
  const double a = q.center[axis] - 0.5 * q.side, b = q.center[axis] + 0.5 * q.side;
  lo = std::max(0, static_cast<int>(std::floor(a / h)) + 1);
  hi = std::min(f.n - 1, static_cast<int>(std::ceil(b / h)) - 1);
  while (lo <= hi && !(lo * h > a)) ++lo;
  while (hi >= lo && !(hi * h < b)) --hi;
}

template <class Fn>
void for_each_node(const GridFunction& f, const CubeRegion& q, Fn&& fn) {
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int k = 0; k < f.dim; ++k) {
    node_range(f, q, k, lo[k], hi[k]);
    if (lo[k] > hi[k]) return;
  }
  std::array<int, 3> idx = lo;
  for (;;) {
    fn(f.flatten(idx));
    int k = f.dim - 1;
    while (k >= 0 && ++idx[k] > hi[k]) {
      idx[k] = lo[k];
      --k;
    }
    if (k < 0) return;
  }
}

double boundary_distance(const Point& x, const CubeRecord& q, int dim) {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dim; ++k) d = std::min(d, 0.5 * q.side - std::abs(x[k] - q.center[k]));
  return std::max(d, 0.0);
}

InequalityRow upper(std::string name, double lhs, double rhs, double slack = 0.0,
                    bool asserted = true) {
  InequalityRow r{std::move(name), lhs, rhs, rhs != 0.0 ? lhs / rhs : 0.0, false, asserted};
  r.holds = lhs <= rhs + slack;
  return r;
}

InequalityRow positive(std::string name, double lhs, double rhs, bool asserted = true) {
  InequalityRow r{std::move(name), lhs, rhs, rhs != 0.0 ? lhs / rhs : 0.0, false, asserted};
  r.holds = lhs > 0.0 && rhs > 0.0 && std::isfinite(lhs) && std::isfinite(rhs);
  return r;
}

}  // namespace

NormalizedFunction normalize_for_decomposition(const GridFunction& f) {
  const CubeStats t = SignField(f).totals();
  const double l1 = t.mass_abs();
  if (!(l1 > 0.0)) throw Error(ErrorCode::IdenticallyZero, "grid function has zero L1 norm");
  NormalizedFunction out;
  out.f = scaled(f, 1.0 / l1);
  out.l1 = l1;
  out.linf = norms(out.f).linf;
  out.mean = (t.mass_plus - t.mass_minus) / l1;
  out.threshold = 100.0 * pow5(f.dim) * out.linf;
  return out;
}

double balance_ratio(const SignField& field, const CubeRegion& cube) {
  const CubeStats s = field.stats(cube);
  if (s.minus == 0.0) return std::numeric_limits<double>::infinity();
  return s.plus / s.minus;
}

double balance_ratio(const GridFunction& f, const CubeRegion& cube) {
  return balance_ratio(SignField(f), cube);
}

CubeRecord stopping_scale(const SignField& field, const GridFunction& f, std::size_t node,
                          double threshold, const ScaleSearchOptions& options) {
  const double value = f.values[node];
  if (value == 0.0) throw Error(ErrorCode::NoBracket, "cube centre is a zero of f");
  const bool plus = value > 0.0;
  const Point centre = f.point(node);
  const auto excess = [&](double side) {
    const CubeStats s = field.stats({centre, side});
    return plus ? s.plus - threshold * s.minus : s.minus - threshold * s.plus;
  };

  const double smallest = 2.0 * f.h();
  if (excess(smallest) < 0.0)
    throw Error(ErrorCode::NoBracket, "cube is balanced already at the grid scale");
  double lo = smallest, hi = -1.0;
  const int scans = std::max(2, options.scan_scales);
  for (int k = 1; k < scans; ++k) {
    const double side = smallest * std::pow(options.max_side / smallest, double(k) / (scans - 1));
    if (excess(side) < 0.0) {
      hi = side;
      break;
    }
    lo = side;
  }
  if (hi < 0.0) throw Error(ErrorCode::NoBracket, "cube stays unbalanced up to the largest scale");
  for (int i = 0; i < options.bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }

  CubeRecord r;
  r.center = centre;
  r.side = lo;
  r.node = node;
  r.plus_dominant = plus;
  r.stats = field.stats({centre, lo});
  const double dom = r.dominant_volume();
  r.residual = dom > 0.0 ? std::abs(dom - threshold * r.minority_volume()) / dom : 0.0;
  for (int k = 0; k < f.dim; ++k)
    if (centre[k] - 0.5 * lo < 0.0 || centre[k] + 0.5 * lo > 1.0) r.clipped = true;
  return r;
}

CubeRecord stopping_scale(const GridFunction& f, std::size_t node) {
  const NormalizedFunction nf = normalize_for_decomposition(f);
  return stopping_scale(SignField(nf.f), nf.f, node, nf.threshold);
}

int greedy_family_bound(int dim) { return static_cast<int>(std::lround(std::pow(3.0, dim))); }

bool cubes_overlap(const CubeRecord& a, const CubeRecord& b, int dim) noexcept {
  for (int k = 0; k < dim; ++k)
    if (!(std::abs(a.center[k] - b.center[k]) < 0.5 * (a.side + b.side))) return false;
  return true;
}

FamilyPartition besicovitch_families(const std::vector<CubeRecord>& records, int dim) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].side > records[b].side;
  });

  FamilyPartition out;
  for (std::size_t i : order) {
    bool covered = false;
    for (std::size_t j : out.kept)
      if (centre_inside(records[i].center, records[j], dim)) {
        covered = true;
        break;
      }
    if (!covered) out.kept.push_back(i);
  }
  for (std::size_t i : out.kept) {
    bool placed = false;
    for (auto& family : out.families) {
      const bool clash = std::any_of(family.begin(), family.end(), [&](std::size_t j) {
        return cubes_overlap(records[i], records[j], dim);
      });
      if (!clash) {
        family.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) out.families.push_back({i});
  }
  return out;
}

double full_threshold_density(int dim) { return 1.0 / (10.0 * pow5(dim)); }

std::size_t classify_full(std::vector<CubeRecord>& records, int dim) {
  const double density = full_threshold_density(dim);
  std::size_t count = 0;
  for (auto& r : records) {
    r.full = r.stats.mass_abs() >= density * r.stats.volume;
    count += r.full;
  }
  return count;
}

double crossover_bound(double nu_mass, double linf, double side, int dim) {
  if (nu_mass < 0.0 || !(linf > 0.0) || !(side > 0.0))
    throw Error(ErrorCode::NonPositive, "crossover bound needs nu >= 0, linf > 0, side > 0");
  const double collar = 2.0 * dim;
  return nu_mass * nu_mass / (2.0 * collar * linf * std::pow(side, dim - 1));
}

const InequalityRow* DecompositionReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

bool DecompositionReport::all_hold() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const InequalityRow& r) { return !r.asserted || r.holds; });
}

DecompositionReport verify_chain(const GridFunction& f, const DecompositionOptions& options) {
  f.validate();
  if (f.periodic) throw Error(ErrorCode::DimensionError, "the cube construction needs a cube grid");
  const Norms raw = norms(f);
  if (raw.linf == 0.0) throw Error(ErrorCode::IdenticallyZero, "grid function vanishes everywhere");
  const double mean = weighted_mean(f);
  if (std::abs(mean) > 1e-9 * raw.l1)
    throw Error(ErrorCode::MassMismatch, "grid function is not mean-zero");

  const int d = f.dim;
  const NormalizedFunction nf = normalize_for_decomposition(f);
  const GridFunction& g = nf.f;
  const SignField field(g);

  DecompositionReport rep;
  rep.dim = d;
  rep.n = f.n;
  rep.l1_input = nf.l1;
  rep.linf = nf.linf;
  rep.mean = nf.mean;
  rep.threshold = nf.threshold;

  // Candidate centres, stratified down to max_centers.
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(g.values[i]) > 1e-9 * nf.linf) nodes.push_back(i);
  if (nodes.size() > options.max_centers && options.max_centers > 0) {
    CounterRng rng(options.seed, 0x5157);
    std::vector<std::size_t> picked;
    picked.reserve(options.max_centers);
    const std::size_t total = nodes.size(), m = options.max_centers;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t lo = k * total / m, hi = (k + 1) * total / m;
      picked.push_back(nodes[lo + rng() % (hi - lo)]);
    }
    nodes.swap(picked);
  }
  rep.candidates = nodes.size();

  for (std::size_t node : nodes) {
    try {
      rep.records.push_back(stopping_scale(field, g, node, nf.threshold, options.search));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoBracket) throw;
      ++rep.no_bracket;
    }
  }
  rep.full_records = classify_full(rep.records, d);
  rep.partition = besicovitch_families(rep.records, d);

  for (const auto& family : rep.partition.families) {
    CompensatedSum m;
    for (std::size_t i : family) m += rep.records[i].stats.mass_abs();
    rep.family_mass.push_back(m.value());
  }
  if (!rep.family_mass.empty()) {
    rep.selected_family = static_cast<std::size_t>(
        std::max_element(rep.family_mass.begin(), rep.family_mass.end()) -
        rep.family_mass.begin());
    rep.selected_mass = rep.family_mass[rep.selected_family];
    CompensatedSum full_mass;
    for (std::size_t i : rep.partition.families[rep.selected_family])
      if (rep.records[i].full) {
        rep.selected_full.push_back(i);
        full_mass += rep.records[i].stats.mass_abs();
        if (rep.records[i].stats.mixed > 0.05 * rep.records[i].stats.volume) ++rep.boundary_flagged;
      }
    rep.selected_full_mass = full_mass.value();
  }

  // Coverage of {f != 0} by the kept cubes, counted on grid nodes.
  {
    std::vector<char> covered(g.size(), 0);
    for (std::size_t i : rep.partition.kept) {
      const auto& r = rep.records[i];
      for_each_node(g, {r.center, r.side}, [&](std::size_t node) { covered[node] = 1; });
    }
    double support = 0.0, inside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.values[i] == 0.0) continue;
      support += g.weight(i);
      if (covered[i]) inside += g.weight(i);
    }
    rep.coverage = support > 0.0 ? inside / support : 0.0;
  }

  const NodalEstimate zero_set = nodal_measure(g);
  rep.nodal_measure = zero_set.measure;

  // Balance of the whole cube.
  {
    const CubeStats t = field.totals();
    const double ratio = t.minus > 0.0 ? t.plus / t.minus : std::numeric_limits<double>::infinity();
    rep.rows.push_back(upper("q0_balance_lower", 1.0 / (2.0 * nf.linf), ratio, 0.0, false));
    rep.rows.push_back(upper("q0_balance_upper", ratio, 2.0 * nf.linf, 0.0, false));
  }

  double worst_residual = 0.0;
  for (const auto& r : rep.records) worst_residual = std::max(worst_residual, r.residual);
  rep.rows.push_back(upper("perfect_balance_residual", worst_residual, options.balance_tolerance));
  rep.rows.push_back(upper("no_bracket_fraction", rep.no_bracket_fraction(), 0.05, 0.0, false));

  const double families = static_cast<double>(rep.partition.families.size());
  rep.rows.push_back(upper("family_count_greedy", families, greedy_family_bound(d)));
  rep.rows.push_back(upper("family_count_besicovitch", families, pow5(d), 0.0, false));
  {
    double worst = 0.0;
    for (const auto& family : rep.partition.families)
      for (std::size_t a = 0; a < family.size(); ++a)
        for (std::size_t b = a + 1; b < family.size(); ++b)
          worst = std::max(worst, overlap_volume(rep.records[family[a]], rep.records[family[b]], d));
    rep.rows.push_back(upper("family_overlap_volume", worst, 1e-12));
  }
  rep.rows.push_back(upper("coverage", 1.0 - 1e-3, rep.coverage, 0.0, false));

  // Mass carried by the selected family and by its full cubes.
  rep.rows.push_back(upper("selected_family_mass", 1.0 / pow5(d), rep.selected_mass, 0.0, false));
  rep.rows.push_back(upper("prop1_mass", 0.9 / pow5(d) * (1.0 - 1e-2), rep.selected_full_mass));

  // Mass split on every full stopping cube.
  {
    double worst_minus_plus = 0.0, worst_plus2 = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.records) {
      if (!r.full) continue;
      const double dom = r.dominant_mass();
      worst_minus_plus = std::max(worst_minus_plus, dom > 0.0 ? r.minority_mass() / dom : 1e300);
      const double abs = r.stats.mass_abs();
      if (abs > 0.0) worst_plus2 = std::min(worst_plus2, dom / abs);
    }
    if (rep.full_records == 0) worst_plus2 = 1.0;
    rep.rows.push_back(upper("lemma_minus_plus", worst_minus_plus, 1.0 / 9.0, 1e-6));
    rep.rows.push_back(upper("lemma_plus2", 0.9, worst_plus2, 1e-6));
  }

  // Zero-set measure against the side lengths of the selected full cubes.
  CompensatedSum sides, mass_sum, mass_sq_over_side;
  for (std::size_t i : rep.selected_full) {
    const auto& r = rep.records[i];
    const double face = std::pow(r.side, d - 1);
    sides += face;
    mass_sum += r.stats.mass_abs();
    mass_sq_over_side += r.stats.mass_abs() * r.stats.mass_abs() / face;
  }
  const double area_rhs = std::pow(nf.linf, -(d - 1.0) / d) * sides.value();
  rep.rows.push_back(positive("prop3_area", area_rhs, rep.nodal_measure));
  {
    double worst = std::numeric_limits<double>::infinity();
    double worst_lhs = 0.0, worst_rhs = 0.0;
    for (std::size_t i : rep.selected_full) {
      const auto& r = rep.records[i];
      const double small = std::min(r.stats.plus, r.stats.minus);
      // The sign volumes count whole boundary cells, so the zero set is
      // measured over every cell the cube touches.
      const double lhs = nodal_measure_in(zero_set, {r.center, r.side + 2.0 * g.h()});
      const double rhs = std::pow(small, (d - 1.0) / d);
      if (rhs > 0.0 && lhs / rhs < worst) {
        worst = lhs / rhs;
        worst_lhs = lhs;
        worst_rhs = rhs;
      }
    }
    if (rep.selected_full.empty()) worst_lhs = worst_rhs = 1.0;
    rep.rows.push_back(positive("isoperimetric_min", worst_lhs, worst_rhs));
  }

  const double cs_lhs = mass_sum.value() * mass_sum.value();
  const double cs_rhs = mass_sq_over_side.value() * sides.value();
  rep.rows.push_back(upper("cauchy_schwarz", cs_lhs, cs_rhs, 1e-12 * cs_rhs));

  // Transport side of the chain.
  std::optional<W1Result> plan;
  const DiscreteMeasure mu = to_measure(g, Sign::Plus);
  const DiscreteMeasure nu = to_measure(g, Sign::Minus);
  switch (options.transport) {
    case TransportMode::Exact:
      plan = w1_exact(mu, nu, Metric::Euclidean, options.solver);
      rep.w1 = plan->cost;
      rep.transport_computed = true;
      break;
    case TransportMode::Given:
      rep.w1 = options.given_w1;
      rep.transport_computed = true;
      break;
    case TransportMode::Skip:
      break;
  }
  if (rep.transport_computed) {
    rep.rows.push_back(
        positive("transport_lower_bound", mass_sq_over_side.value() / nf.linf, rep.w1));
    const double product = rep.w1 * rep.nodal_measure * std::pow(nf.linf, 2.0 - 1.0 / d);
    rep.rows.push_back(positive("uncertainty_product", product, 1.0));
  }

  if (plan) {
    std::vector<int> owner(g.size(), -1);
    for (std::size_t k = 0; k < rep.selected_full.size(); ++k) {
      const auto& r = rep.records[rep.selected_full[k]];
      for_each_node(g, {r.center, r.side}, [&](std::size_t node) { owner[node] = static_cast<int>(k); });
    }
    rep.crossover.resize(rep.selected_full.size());
    for (std::size_t k = 0; k < rep.selected_full.size(); ++k) rep.crossover[k].record = rep.selected_full[k];
    for (const auto& e : plan->plan.entries) {
      const std::size_t xs = mu.grid_index[e.src], yd = nu.grid_index[e.dst];
      const int qs = owner[xs], qd = owner[yd];
      if (qs == qd) continue;
      // Mass leaving a plus-dominant cube or entering a minus-dominant one.
      if (qs >= 0 && rep.records[rep.selected_full[qs]].plus_dominant) {
        auto& row = rep.crossover[qs];
        row.exported_mass += e.mass;
        row.exported_cost += e.mass * boundary_distance(mu.points[e.src], rep.records[row.record], d);
      }
      if (qd >= 0 && !rep.records[rep.selected_full[qd]].plus_dominant) {
        auto& row = rep.crossover[qd];
        row.exported_mass += e.mass;
        row.exported_cost += e.mass * boundary_distance(nu.points[e.dst], rep.records[row.record], d);
      }
    }
    double worst = 0.0, worst_bound = 0.0, worst_cost = 0.0;
    double worst_nu = std::numeric_limits<double>::infinity(), nu_lhs = 0.0, nu_rhs = 0.0;
    for (auto& row : rep.crossover) {
      const auto& r = rep.records[row.record];
      row.bound = crossover_bound(row.exported_mass, nf.linf, r.side, d);
      if (row.exported_cost > 0.0 && row.bound / row.exported_cost > worst) {
        worst = row.bound / row.exported_cost;
        worst_bound = row.bound;
        worst_cost = row.exported_cost;
      }
      const double need = 0.8 * r.stats.mass_abs();
      if (need > 0.0 && row.exported_mass / need < worst_nu) {
        worst_nu = row.exported_mass / need;
        nu_lhs = need;
        nu_rhs = row.exported_mass;
      }
    }
    rep.rows.push_back(upper("crossover", worst_bound, worst_cost, 0.0, false));
    rep.rows.push_back(upper("exported_mass", nu_lhs, nu_rhs, 0.0, false));
  }
  return rep;
}

std::string report_json(const DecompositionReport& rep) {
  nlohmann::ordered_json j;
  j["dim"] = rep.dim;
  j["n"] = rep.n;
  j["l1_input"] = rep.l1_input;
  j["linf"] = rep.linf;
  j["mean"] = rep.mean;
  j["threshold"] = rep.threshold;
  j["candidates"] = rep.candidates;
  j["no_bracket"] = rep.no_bracket;
  j["no_bracket_fraction"] = rep.no_bracket_fraction();
  j["records"] = rep.records.size();
  j["full_records"] = rep.full_records;
  j["kept"] = rep.partition.kept.size();
  j["families"] = rep.partition.families.size();
  nlohmann::ordered_json fam = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rep.partition.families.size(); ++k)
    fam.push_back({{"cubes", rep.partition.families[k].size()}, {"mass", rep.family_mass[k]}});
  j["family_summary"] = fam;
  j["selected_family"] = rep.selected_family;
  j["selected_mass"] = rep.selected_mass;
  j["selected_full_cubes"] = rep.selected_full.size();
  j["selected_full_mass"] = rep.selected_full_mass;
  j["boundary_flagged"] = rep.boundary_flagged;
  j["coverage"] = rep.coverage;
  j["nodal_measure"] = rep.nodal_measure;
  if (rep.transport_computed) j["w1"] = rep.w1;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"name", r.name},
                    {"lhs", r.lhs},
                    {"rhs", r.rhs},
                    {"ratio", r.ratio},
                    {"holds", r.holds},
                    {"asserted", r.asserted}});
  j["inequalities"] = rows;
  nlohmann::ordered_json cross = nlohmann::ordered_json::array();
  for (const auto& c : rep.crossover)
    cross.push_back({{"record", c.record},
                     {"exported_mass", c.exported_mass},
                     {"exported_cost", c.exported_cost},
                     {"bound", c.bound}});
  j["crossover"] = cross;
  j["all_hold"] = rep.all_hold();
  return j.dump(2);
}

void write_cubes_csv(const DecompositionReport& rep, std::ostream& out) {
  std::vector<int> family(rep.records.size(), -1);
  for (std::size_t k = 0; k < rep.partition.families.size(); ++k)
    for (std::size_t i : rep.partition.families[k]) family[i] = static_cast<int>(k);
  out << "index,family,selected,full,plus_dominant,clipped,cx,cy,cz,side,v_plus,v_minus,"
         "mass_plus,mass_minus,residual\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const auto& r = rep.records[i];
    const bool selected = family[i] == static_cast<int>(rep.selected_family);
    out << i << ',' << family[i] << ',' << selected << ',' << r.full << ',' << r.plus_dominant
        << ',' << r.clipped << ',' << r.center[0] << ',' << r.center[1] << ',' << r.center[2]
        << ',' << r.side << ',' << r.stats.plus << ',' << r.stats.minus << ','
        << r.stats.mass_plus << ',' << r.stats.mass_minus << ',' << r.residual << '\n';
  }
}

}  // namespace ntlab
