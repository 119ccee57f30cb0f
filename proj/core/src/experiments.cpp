#include "ntlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ntlab/error.hpp"
#include "ntlab/nodal.hpp"
#include "ntlab/random.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

namespace {

using ordered_json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

double w1_of(const GridFunction& f, const ExperimentConfig& cfg) {
  const Metric metric = f.periodic ? Metric::Torus : Metric::Euclidean;
  const DiscreteMeasure mu = to_measure(f, Sign::Plus), nu = to_measure(f, Sign::Minus);
  if (cfg.solver == SolverChoice::Entropic) return w1_entropic(mu, nu, metric, cfg.reg).rounded_cost;
  return w1_exact(mu, nu, metric).cost;
}

// Exact W1 of a function of x_d alone: project both parts onto the last
// axis; the projection is 1-Lipschitz and vertical transport attains it.
double w1_last_axis(const GridFunction& f) {
  DiscreteMeasure mu, nu;
  mu.dim = nu.dim = 1;
  std::vector<double> plus(f.n, 0.0), minus(f.n, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int j = f.unflatten(i)[f.dim - 1];
    const double v = f.values[i] * f.weight(i);
    (v > 0 ? plus[j] : minus[j]) += std::abs(v);
  }
  for (int j = 0; j < f.n; ++j) {
    if (plus[j] > 0) mu.add(Point{f.coord(j), 0, 0}, plus[j]);
    if (minus[j] > 0) nu.add(Point{f.coord(j), 0, 0}, minus[j]);
  }
  return w1_1d_oracle(mu, nu);
}

std::string alpha_label(double a) {
  std::ostringstream s;
  s << a;
  return s.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

}  // namespace

ExperimentConfig experiment_config(const KeyValueConfig& kv, const std::string& experiment) {
  std::set<std::string> allowed{"experiment", "dim", "n", "seed"};
  ExperimentConfig c;
  c.experiment = experiment;
  if (kv.has("experiment") && kv.get_string("experiment", "") != experiment)
    throw Error(ErrorCode::ConfigError, "config is for '" + kv.get_string("experiment", "") + "', not '" + experiment + "'");
  c.seed = kv.get_u64("seed", c.seed);

  if (experiment == "epsilon-family") {
    allowed.insert({"epsilons", "alphas"});
    c.dim = kv.get_int("dim", 2);
    c.n = kv.get_int("n", 512);
    c.epsilons = kv.get_doubles("epsilons", c.epsilons);
    c.alphas = kv.get_doubles("alphas", c.alphas);
    require(!c.epsilons.empty(), "epsilons must not be empty");
    for (double e : c.epsilons) require(e > 0.0 && e <= 0.25, "epsilons must lie in (0, 1/4]");
    require(c.dim >= 1 && c.dim <= 3, "dim must be 1, 2 or 3");
  } else if (experiment == "uncertainty") {
    allowed.insert({"trials", "min_modes", "max_modes", "include_fixed", "solver", "reg"});
    c.dim = kv.get_int("dim", 2);
    c.n = kv.get_int("n", 256);
    c.trials = kv.get_int("trials", 50);
    c.min_modes = kv.get_int("min_modes", c.min_modes);
    c.max_modes = kv.get_int("max_modes", c.max_modes);
    c.include_fixed = kv.get_int("include_fixed", 1) != 0;
    const std::string solver = kv.get_string("solver", "exact");
    require(solver == "exact" || solver == "entropic", "solver must be exact or entropic");
    c.solver = solver == "exact" ? SolverChoice::Exact : SolverChoice::Entropic;
    c.reg = kv.get_double("reg", c.reg);
    require(c.dim == 1 || c.dim == 2, "uncertainty needs dim 1 or 2");
    require(c.min_modes >= 1 && c.max_modes >= c.min_modes, "need 1 <= min_modes <= max_modes");
    require(c.trials >= 0, "trials must be >= 0");
    require(c.reg > 0.0, "reg must be positive");
  } else if (experiment == "staircase") {
    allowed.insert({"p_values", "staircase_n"});
    c.p_values = kv.get_doubles("p_values", c.p_values);
    c.staircase_n = kv.get_ints("staircase_n", c.staircase_n);
    for (double p : c.p_values) require(p >= 1.0, "p_values must be >= 1");
    for (int n : c.staircase_n) require(n >= 1, "staircase_n must be >= 1");
  } else if (experiment == "sturm-scaling") {
    allowed.insert({"L_over_4pi2", "trials"});
    c.dim = kv.get_int("dim", 1);
    c.n = kv.get_int("n", 1024);
    c.trials = kv.get_int("trials", 1);
    c.L_over_4pi2 = kv.get_doubles("L_over_4pi2", {1, 4, 16, 64, 256});
    require(c.dim == 1 || c.dim == 2, "sturm-scaling needs dim 1 or 2");
    require(!c.L_over_4pi2.empty(), "L_over_4pi2 must not be empty");
    for (double l : c.L_over_4pi2) require(l > 0.0, "L_over_4pi2 values must be positive");
    require(c.trials >= 1, "trials must be >= 1");
  } else if (experiment == "decompose") {
    allowed.insert({"function", "epsilon", "transport", "max_centers"});
    c.dim = kv.get_int("dim", 2);
    c.n = kv.get_int("n", 256);
    c.function = kv.get_string("function", c.function);
    c.epsilon = kv.get_double("epsilon", c.epsilon);
    c.max_centers = static_cast<std::size_t>(kv.get_int("max_centers", static_cast<int>(c.max_centers)));
    const std::string transport = kv.get_string("transport", "exact");
    require(transport == "exact" || transport == "skip", "transport must be exact or skip");
    c.transport = transport == "exact" ? TransportMode::Exact : TransportMode::Skip;
    require(c.dim == 2, "decompose runs at dim 2");
    require(c.n >= 8 && c.n <= 512, "decompose needs 8 <= n <= 512");
    require(c.function == "sine" || c.function == "epsilon", "function must be sine or epsilon");
    require(c.epsilon > 0.0 && c.epsilon <= 0.25, "epsilon must lie in (0, 1/4]");
  } else {
    throw Error(ErrorCode::ConfigError, "unknown experiment '" + experiment + "'");
  }
  require(c.n >= 2, "n must be >= 2");
  kv.check_keys(allowed);
  return c;
}

double epsilon_profile(double t, double eps) {
  if (t > 0.5) return -epsilon_profile(1.0 - t, eps);
  const double a = 0.5 - eps, b = 0.5 - eps / 2;
  if (t <= a) return -eps * eps;
  if (t <= b) return -eps * eps + (t - a) / (b - a) * (eps * eps - 1.0 / eps);
  return -(0.5 - t) / (0.5 - b) / eps;
}

GridFunction epsilon_family(int dim, int n, double eps) {
  if (!(eps > 0.0 && eps <= 0.25)) throw Error(ErrorCode::ConfigError, "epsilon must lie in (0, 1/4]");
  GridFunction f(dim, n, false);
  std::vector<double> profile(n);
  for (int j = 0; j < n; ++j) {
    const int mirror = n - 1 - j;
    profile[j] = j < mirror ? epsilon_profile(f.coord(j), eps) : (j == mirror ? 0.0 : -profile[mirror]);
  }
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = profile[f.unflatten(i)[dim - 1]];
  return f;
}

double uncertainty_product(double w1, double nodal, double linf, double l1, double alpha) {
  return w1 * nodal * std::pow(linf / l1, alpha) / l1;
}

EpsilonResult run_epsilon_family(const ExperimentConfig& cfg) {
  EpsilonResult r;
  r.dim = cfg.dim;
  r.n = cfg.n;
  r.alphas = cfg.alphas;
  std::vector<double> le, we;
  std::vector<std::vector<double>> products(cfg.alphas.size());
  for (double eps : cfg.epsilons) {
    const GridFunction f = epsilon_family(cfg.dim, cfg.n, eps);
    EpsilonRow row;
    row.eps = eps;
    const Norms nm = norms(f);
    row.linf = nm.linf;
    row.l1 = nm.l1;
    row.nodal = nodal_measure(f).measure;
    row.w1 = w1_last_axis(f);
    double refl = 0.0, dual = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double g = f.point(i)[cfg.dim - 1] - 0.5;
      const double m = f.values[i] * f.weight(i);
      if (m > 0) refl += 2.0 * g * m;
      dual += g * m;
    }
    row.reflection_cost = refl;
    row.dual_bound = dual;
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      row.products.push_back(uncertainty_product(row.w1, row.nodal, row.linf, row.l1, cfg.alphas[a]));
      products[a].push_back(row.products.back());
    }
    le.push_back(row.linf * eps);
    we.push_back(row.w1 / eps);
    r.rows.push_back(row);
  }
  r.linf_eps_spread = spread(le);
  r.w1_eps_spread = spread(we);
  for (const auto& p : products) {
    r.product_drop.push_back(p.front() / p.back());
    r.product_spread.push_back(spread(p));
  }
  return r;
}

GridFunction random_cosine_field(int dim, int n, int modes, std::uint64_t seed) {
  if (dim < 1 || dim > 2) throw Error(ErrorCode::DimensionError, "cosine fields need d in {1,2}");
  CounterRng rng(seed, 0x636f73);
  std::normal_distribution<double> normal;
  const int K1 = dim == 2 ? modes : 0;
  std::vector<double> coef((modes + 1) * (K1 + 1), 0.0);
  for (int a = 0; a <= modes; ++a)
    for (int b = 0; b <= K1; ++b)
      if (a || b) coef[a * (K1 + 1) + b] = normal(rng);
  // cos(pi k i / (n - 1)) with the phase reduced exactly.
  std::vector<double> table((modes + 1) * static_cast<std::size_t>(n));
  const long long period = 2LL * (n - 1);
  for (int k = 0; k <= modes; ++k)
    for (int i = 0; i < n; ++i)
      table[k * static_cast<std::size_t>(n) + i] =
          std::cos(kPi * static_cast<double>((static_cast<long long>(k) * i) % period) / (n - 1));
  GridFunction f(dim, n, false);
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto idx = f.unflatten(p);
    double s = 0.0;
    for (int a = 0; a <= modes; ++a)
      for (int b = 0; b <= K1; ++b) {
        const double c = coef[a * (K1 + 1) + b];
        if (c == 0.0) continue;
        double term = c * table[a * static_cast<std::size_t>(n) + idx[0]];
        if (dim == 2) term *= table[b * static_cast<std::size_t>(n) + idx[1]];
        s += term;
      }
    f.values[p] = s;
  }
  return enforce_zero_mean(f);
}

UncertaintyResult run_uncertainty_suite(const ExperimentConfig& cfg) {
  UncertaintyResult r;
  r.dim = cfg.dim;
  r.n = cfg.n;
  const double alpha = 2.0 - 1.0 / cfg.dim;
  const auto measure = [&](const std::string& label, std::uint64_t seed, int modes, const GridFunction& f) {
    UncertaintyRow row;
    row.label = label;
    row.seed = seed;
    row.modes = modes;
    const Norms nm = norms(f);
    row.linf = nm.linf;
    row.l1 = nm.l1;
    row.nodal = nodal_measure(f).measure;
    row.w1 = w1_of(f, cfg);
    row.product = uncertainty_product(row.w1, row.nodal, row.linf, row.l1, alpha);
    row.product_sb = uncertainty_product(row.w1, row.nodal, row.linf, row.l1, 1.0);
    r.rows.push_back(row);
  };
  const CounterRng root(cfg.seed, 0x756e63);
  for (int t = 0; t < cfg.trials; ++t) {
    CounterRng rng = root.fork(static_cast<std::uint64_t>(t));
    const int modes = cfg.min_modes + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.max_modes - cfg.min_modes + 1));
    const std::uint64_t seed = rng();
    measure("random", seed, modes, random_cosine_field(cfg.dim, cfg.n, modes, seed));
  }
  r.random_rows = r.rows.size();
  if (cfg.include_fixed) {
    if (cfg.dim == 2) {
      measure("sine", 0, 2, enforce_zero_mean(GridFunction::sample(2, cfg.n, false, [](const Point& p) {
                return std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]);
              })));
    } else {
      measure("cosine", 0, 2, enforce_zero_mean(GridFunction::sample(1, cfg.n, false, [](const Point& p) {
                return std::cos(2 * kPi * p[0]);
              })));
    }
    measure("epsilon_0.05", 0, 0, epsilon_family(cfg.dim, cfg.n, 0.05));
  }
  r.min_product = std::numeric_limits<double>::infinity();
  r.min_product_sb = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const UncertaintyRow& row = r.rows[i];
    if (row.product < r.min_product) {
      r.min_product = row.product;
      r.argmin = row.label + "#" + std::to_string(i);
    }
    r.min_product_sb = std::min(r.min_product_sb, row.product_sb);
    r.all_positive = r.all_positive && row.product > 0.0;
  }
  return r;
}

StaircaseResult run_staircase(const ExperimentConfig& cfg) {
  StaircaseResult r;
  const DiscreteMeasure mu = dirac(1.0), nu = dirac(0.0);
  for (int n : cfg.staircase_n) {
    const SignedPlan plan = staircase_plan(n);
    for (double p : cfg.p_values) {
      StaircaseRow row;
      row.n = n;
      row.p = p;
      row.cost = signed_plan_cost(plan, mu, nu, p);
      row.predicted = std::pow(2.0 * n, 1.0 - p);
      row.normalized = row.cost * std::pow(2.0 * n, p - 1.0);
      r.max_normalized_error = std::max(r.max_normalized_error, std::abs(row.normalized - 1.0));
      r.rows.push_back(row);
    }
  }
  return r;
}

SturmResult run_sturm_scaling(const ExperimentConfig& cfg) {
  ScalingOptions opt;
  opt.dim = cfg.dim;
  opt.n = cfg.n;
  opt.trials = cfg.trials;
  opt.seed = cfg.seed;
  for (double v : cfg.L_over_4pi2) opt.L.push_back(4 * kPi * kPi * v);
  SturmResult r;
  r.scaling = scaling_experiment(opt);
  for (const ScalingRow& row : r.scaling.rows) r.log_rate_ratio.push_back(row.w1 / std::sqrt(std::log(row.L) / row.L));
  return r;
}

DecompositionReport run_decomposition_demo(const ExperimentConfig& cfg) {
  GridFunction f = cfg.function == "sine"
                       ? enforce_zero_mean(GridFunction::sample(2, cfg.n, false, [](const Point& p) {
                           return std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]);
                         }))
                       : epsilon_family(2, cfg.n, cfg.epsilon);
  DecompositionOptions opt;
  opt.seed = cfg.seed;
  opt.max_centers = cfg.max_centers;
  opt.transport = cfg.transport;
  return verify_chain(f, opt);
}

ExperimentOutput render(const EpsilonResult& r) {
  std::vector<std::string> cols{"eps",  "linf",        "l1",          "nodal",          "w1",
                                "w1_over_eps", "linf_times_eps", "reflection_cost", "dual_bound"};
  for (double a : r.alphas) cols.push_back("product_alpha_" + alpha_label(a));
  Table t(cols);
  for (const EpsilonRow& row : r.rows) {
    std::vector<Cell> cells{row.eps,           row.linf,           row.l1,
                            row.nodal,         row.w1,             row.w1 / row.eps,
                            row.linf * row.eps, row.reflection_cost, row.dual_bound};
    for (double p : row.products) cells.emplace_back(p);
    t.add_row(cells);
  }
  ordered_json j;
  j["dim"] = r.dim;
  j["n"] = r.n;
  j["linf_eps_spread"] = r.linf_eps_spread;
  j["w1_eps_spread"] = r.w1_eps_spread;
  for (std::size_t a = 0; a < r.alphas.size(); ++a) {
    ordered_json pa;
    pa["alpha"] = r.alphas[a];
    pa["drop_first_to_last"] = r.product_drop[a];
    pa["spread"] = r.product_spread[a];
    j["products"].push_back(pa);
  }
  return {{{"epsilon_family.csv", t.csv()}}, j.dump(2)};
}

ExperimentOutput render(const UncertaintyResult& r) {
  Table t({"label", "seed", "modes", "w1", "nodal", "linf", "l1", "product", "product_sb"});
  for (const UncertaintyRow& row : r.rows)
    t.add_row({row.label, static_cast<std::int64_t>(row.seed), static_cast<std::int64_t>(row.modes), row.w1,
               row.nodal, row.linf, row.l1, row.product, row.product_sb});
  ordered_json j;
  j["dim"] = r.dim;
  j["n"] = r.n;
  j["instances"] = r.rows.size();
  j["random_instances"] = r.random_rows;
  j["exponent"] = 2.0 - 1.0 / r.dim;
  j["min_product"] = r.min_product;
  j["argmin"] = r.argmin;
  j["min_product_sb"] = r.min_product_sb;
  j["all_positive"] = r.all_positive;
  return {{{"uncertainty.csv", t.csv()}}, j.dump(2)};
}

ExperimentOutput render(const StaircaseResult& r) {
  Table t({"n", "p", "cost", "predicted", "normalized"});
  for (const StaircaseRow& row : r.rows)
    t.add_row({static_cast<std::int64_t>(row.n), row.p, row.cost, row.predicted, row.normalized});
  ordered_json j;
  j["rows"] = r.rows.size();
  j["max_normalized_error"] = r.max_normalized_error;
  return {{{"staircase.csv", t.csv()}}, j.dump(2)};
}

ExperimentOutput render(const SturmResult& r) {
  Table t({"L", "l1", "w1_exact", "plan_cost", "ratio", "slope", "plan_ratio", "w1_over_log_rate",
           "max_marginal_deviation"});
  for (std::size_t i = 0; i < r.scaling.rows.size(); ++i) {
    const ScalingRow& row = r.scaling.rows[i];
    t.add_row({row.L, row.l1, row.w1, row.plan_cost, row.ratio, row.slope,
               row.plan_cost * std::sqrt(row.L) / row.l1, r.log_rate_ratio[i], row.max_marginal_deviation});
  }
  ordered_json j;
  j["dim"] = r.scaling.dim;
  j["n"] = r.scaling.n;
  j["slope"] = r.scaling.slope;
  j["ratio_spread"] = r.scaling.ratio_spread;
  j["cost_dominates"] = r.scaling.cost_dominates;
  return {{{"sturm_scaling.csv", t.csv()}}, j.dump(2)};
}

ExperimentOutput render(const DecompositionReport& r) {
  std::ostringstream cubes;
  write_cubes_csv(r, cubes);
  Table t({"name", "lhs", "rhs", "ratio", "holds", "asserted"});
  for (const InequalityRow& row : r.rows)
    t.add_row({row.name, row.lhs, row.rhs, row.ratio, static_cast<std::int64_t>(row.holds),
               static_cast<std::int64_t>(row.asserted)});
  const std::string report = report_json(r);
  return {{{"report.json", report}, {"cubes.csv", cubes.str()}, {"inequalities.csv", t.csv()}}, report};
}

void write_experiment(const std::string& dir, const std::string& experiment, const KeyValueConfig& kv,
                      const ExperimentConfig& cfg, const ExperimentOutput& output, double wall_seconds) {
  ordered_json manifest;
  manifest["experiment"] = experiment;
  manifest["version"] = library_version();
  manifest["seed"] = cfg.seed;
  manifest["wall_seconds"] = wall_seconds;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : kv.entries()) config[k] = v;
  manifest["config"] = config;
  manifest["files"] = ordered_json::array();
  for (const auto& [name, content] : output.files) {
    write_text_file(dir + "/" + name, content);
    manifest["files"].push_back(name);
  }
  manifest["summary"] = ordered_json::parse(output.summary_json);
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ntlab
