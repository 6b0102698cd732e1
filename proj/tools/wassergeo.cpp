// wassergeo command-line front end.
//
// Exit codes: 0 success, 1 audit failure, 2 invalid input or usage.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wassergeo/audits.hpp"
#include "wassergeo/io.hpp"
#include "wassergeo/wassergeo.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wassergeo;

namespace {

int log_level() {
  const char* v = std::getenv("WASSERGEO_LOG");
  if (!v) return 0;
  const std::string s(v);
  if (s == "debug" || s == "2") return 2;
  if (s == "info" || s == "1") return 1;
  return 0;
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[wassergeo] " << msg << "\n";
}

struct Options {
  std::string cost = "";
  double p = 2.0;
  double lambda_tol = 1e-8;
  std::string convention = "standard";
  double K = 0.0;
  double N = 2.0;
  std::string U = "UN";
  std::vector<double> ts;
  std::size_t trials = 1000;
  std::uint64_t seed = 7;
  unsigned threads = 1;
  std::string out;
  double tol = -1.0;  // negative: per-command default
  std::string variant = "corrected";
  std::string suite;
  std::string space;
  std::string phi;
  double q = 2.0;
  double radius = 0.0;
  std::size_t x0 = npos;
  bool weak = false;
  std::vector<std::string> inputs;
};

struct Output {
  json report;
  std::string csv_name;
  std::string csv;
  bool csv_primary = false;  // print CSV instead of JSON when no --out
  bool failed = false;
};

json config_json(const std::string& cmd, const Options& o) {
  json c;
  c["command"] = cmd;
  c["inputs"] = o.inputs;
  if (!o.cost.empty()) c["cost"] = o.cost;
  c["p"] = o.p;
  c["lambda_tol"] = o.lambda_tol;
  c["K"] = o.K;
  c["N"] = o.N;
  c["U"] = o.U;
  c["t"] = o.ts;
  c["trials"] = o.trials;
  c["tol"] = o.tol;
  c["variant"] = o.variant;
  if (!o.suite.empty()) c["suite"] = o.suite;
  if (!o.space.empty()) c["space"] = o.space;
  if (!o.phi.empty()) c["phi"] = o.phi;
  c["q"] = o.q;
  c["weak"] = o.weak;
  return c;
}

struct Loaded {
  std::optional<MetricMeasureSpace> space;
  DiscreteMeasure measure;
};

/// A measure file is {"mass": [...]} or a bare array, optionally with a
/// "space" entry (inline or a path relative to the file).
Loaded load_measure(const std::string& path, const std::string& space_flag) {
  const json j = io::read_json(path);
  Loaded l;
  l.measure = io::measure_from_json(j);
  if (!space_flag.empty())
    l.space = io::space_from_json(io::read_json(space_flag));
  else if (j.is_object() && j.contains("space"))
    l.space = io::resolve_space(j.at("space"), fs::path(path).parent_path());
  const double total = std::accumulate(l.measure.mass.begin(), l.measure.mass.end(), 0.0);
  if (std::abs(total - 1.0) <= 1e-9 && total > 0) l.measure.normalize();
  return l;
}

std::pair<MetricMeasureSpace, std::pair<DiscreteMeasure, DiscreteMeasure>> load_pair(const Options& o) {
  if (o.inputs.size() != 2) throw Error("MalformedInput", "expected two measure files");
  auto a = load_measure(o.inputs[0], o.space);
  auto b = load_measure(o.inputs[1], o.space);
  if (!a.space && !b.space) throw Error("MalformedInput", "no space given: use --space or a \"space\" entry");
  MetricMeasureSpace space = a.space ? std::move(*a.space) : std::move(*b.space);
  validate_measure(space, a.measure);
  validate_measure(space, b.measure);
  return {std::move(space), {std::move(a.measure), std::move(b.measure)}};
}

CostModel power_or_cost(const Options& o) { return o.cost.empty() ? CostModel::power(o.p) : io::cost_from_string(o.cost); }

std::string table_csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::string out = header + "\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + io::format_double(r[k]);
    out += "\n";
  }
  return out;
}

Output cmd_ot(const Options& o) {
  auto [space, mus] = load_pair(o);
  const auto& [mu0, mu1] = mus;
  const auto cost = power_or_cost(o);
  const auto sol = solve(space, mu0, mu1, cost);
  Output out;
  out.report = io::solution_summary(sol);
  out.report["cost"] = io::cost_to_json(cost);
  out.report["space"] = io::space_summary(space);
  if (cost.is_power()) {
    const double v = std::max(0.0, sol.primal);
    const double scaled = parse_convention(o.convention) == Convention::Paper ? v : cost.p * v;
    out.report["w_p"] = std::pow(scaled, 1.0 / cost.p);
  }
  out.report["phi"] = io::potential_to_json(sol.phi, space.size());
  out.report["psi"] = io::potential_to_json(sol.psi, space.size());
  out.csv_name = "coupling.csv";
  out.csv = io::coupling_csv(sol.coupling);
  out.failed = sol.gap > 1e-8 * (1.0 + std::abs(sol.primal));
  return out;
}

Output cmd_orlicz(const Options& o) {
  auto [space, mus] = load_pair(o);
  const auto& [mu0, mu1] = mus;
  const std::string desc = o.cost.empty() ? "orlicz:exp_m1_mr" : o.cost;
  const auto cost = io::cost_from_string(desc);
  const OrliczFunction L = cost.is_power() ? OrliczFunction::power(cost.p) : cost.L;
  const auto res = orlicz_distance(space, mu0, mu1, L, o.lambda_tol);
  Output out;
  out.report["w_L"] = res.lambda_star;
  out.report["L"] = L.name;
  out.report["g_at_lambda_star"] = res.g;
  out.report["iterations"] = res.iterations;
  out.report["trace_monotone"] = trace_monotone(res.trace);
  out.report["solution"] = io::solution_summary(res.solution);
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.trace) rows.push_back({s.lambda, s.g});
  out.csv_name = "bisection.csv";
  out.csv = table_csv("lambda,g", rows);
  out.failed = !trace_monotone(res.trace);
  if (!o.phi.empty()) {
    const auto rep = jensen_monotonicity_check(space, mu0, mu1, L, OuterFunction::by_name(o.phi),
                                               o.tol < 0 ? 1e-8 : o.tol, o.lambda_tol);
    out.report["jensen"] = {{"phi", o.phi}, {"w_L", rep.w_L}, {"w_phi_L", rep.w_phi_L}, {"verdict", rep.verdict}};
    out.failed = out.failed || !rep.verdict;
  }
  return out;
}

std::vector<double> default_ts(const Options& o, std::vector<double> fallback) {
  return o.ts.empty() ? fallback : o.ts;
}

Output cmd_geodesic(const Options& o) {
  auto [space, mus] = load_pair(o);
  const auto& [mu0, mu1] = mus;
  const auto cost = power_or_cost(o);
  const auto ts = default_ts(o, {0.0, 0.25, 0.5, 0.75, 1.0});
  DynamicPlan plan;
  MeasureDistance dist;
  double floor = 1e-9;
  if (cost.is_power()) {
    plan = build_plan(solve(space, mu0, mu1, cost), cost);
    dist = [&, p = cost.p](const DiscreteMeasure& a, const DiscreteMeasure& b) {
      return wasserstein_p(space, a, b, p, parse_convention(o.convention));
    };
  } else {
    plan = orlicz_geodesic(space, mu0, mu1, cost.L, o.lambda_tol);
    dist = [&, L = cost.L](const DiscreteMeasure& a, const DiscreteMeasure& b) {
      return orlicz_distance(space, a, b, L, o.lambda_tol).lambda_star;
    };
    floor = 4.0 * o.lambda_tol * (1.0 + plan.lambda_star);
  }
  const auto chk = check_plan_geodesic(space, plan, dist, ts);
  const double scale = cost.is_power() ? 1.0 : 1.0 / cost.L.inverse(1.0);
  const double tol = o.tol >= 0 ? o.tol : 5.0 * (2.0 * chk.max_snap * scale + floor);
  Output out;
  out.report["total"] = chk.total;
  out.report["deviation"] = chk.deviation;
  out.report["max_snap"] = chk.max_snap;
  out.report["tolerance"] = tol;
  out.report["atoms"] = plan.atoms.size();
  out.report["verdict"] = chk.deviation <= tol;
  std::vector<std::vector<double>> rows;
  for (const auto& r : chk.table) rows.push_back({r[0], r[1], r[2]});
  out.csv_name = "geodesic.csv";
  out.csv = table_csv("s,t,w", rows);
  out.failed = chk.deviation > tol;
  return out;
}

/// {"space", "mu0", "mu1"} (plan computed) or {"space", "atoms": [[x, y, mass]]}.
DynamicPlan load_plan(const json& j, const MetricMeasureSpace& space, const CostModel& cost) {
  if (j.contains("atoms")) {
    DynamicPlan plan;
    plan.cost = cost;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 3) throw Error("MalformedInput", "plan atom must be [x, y, mass]");
      const auto x = a[0].get<std::size_t>(), y = a[1].get<std::size_t>();
      if (x >= space.size() || y >= space.size()) throw Error("SizeMismatch", "plan atom outside the space");
      plan.atoms.push_back({x, y, a[2].get<double>()});
    }
    return plan;
  }
  auto mu0 = io::measure_from_json(j.at("mu0"));
  auto mu1 = io::measure_from_json(j.at("mu1"));
  mu0.normalize();
  mu1.normalize();
  return build_plan(solve(space, mu0, mu1, cost), cost);
}

Output cmd_cd_check(const Options& o) {
  if (o.inputs.size() != 1) throw Error("MalformedInput", "expected one plan file");
  const json j = io::read_json(o.inputs[0]);
  const auto space = o.space.empty() ? io::resolve_space(io::get<json>(j, "space", "plan"),
                                                         fs::path(o.inputs[0]).parent_path())
                                     : io::space_from_json(io::read_json(o.space));
  const auto cost = power_or_cost(o);
  const auto plan = load_plan(j, space, cost);
  const auto ts = default_ts(o, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const double tol = o.tol < 0 ? 0.0 : o.tol;
  CDReport rep;
  Output out;
  if (o.weak) {
    double w = 0.0;
    for (const auto& a : plan.atoms) w += a.mass * std::pow(space.distance(a.x, a.y), 2.0);
    if (parse_convention(o.convention) == Convention::Paper) w /= 2.0;
    rep = check_weak_cdp_infty(space, plan, o.K, std::sqrt(w), ts, tol);
    out.report["condition"] = "weak CD(K,inf), Boltzmann entropy";
  } else {
    const auto U = EntropyFunctional::by_name(o.U, o.N);
    rep = check_strong_cdp(space, plan, {o.K, o.N}, U, ts, tol);
    out.report["condition"] = "strong CD_p(K,N)";
    out.report["U"] = U.name;
  }
  out.report["worst_residual"] = rep.worst_residual;
  out.report["tolerance"] = tol;
  out.report["verdict"] = rep.verdict;
  std::vector<std::vector<double>> rows;
  for (const auto& s : rep.per_t) {
    out.report["per_t"].push_back({{"t", s.t}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"residual", s.residual}});
    rows.push_back({s.t, s.lhs, s.rhs, s.residual});
  }
  out.csv_name = "cd.csv";
  out.csv = table_csv("t,lhs,rhs,residual", rows);
  out.failed = !rep.verdict;
  return out;
}

Output cmd_lemma_check(const Options& o) {
  const std::vector<CostModel> power{CostModel::power(1.5), CostModel::power(2.0), CostModel::power(3.0)};
  const std::vector<CostModel> orlicz{CostModel::orlicz(OrliczFunction::exp_m1_mr()),
                                      CostModel::orlicz(OrliczFunction::cosh_m1())};
  std::vector<CostModel> chosen;
  if (!o.cost.empty()) chosen.push_back(io::cost_from_string(o.cost));
  auto pick = [&](const std::vector<CostModel>& fallback) { return chosen.empty() ? fallback : chosen; };
  Output out;
  const std::string& s = o.suite;
  if (s == "p-dist-ineq")
    out.report = audits::dist_ineq_suite(pick(power), o.trials, o.seed);
  else if (s == "dist-ineq-orlicz")
    out.report = audits::dist_ineq_suite(pick(orlicz), o.trials, o.seed);
  else if (s == "star-shaped")
    out.report = audits::star_shape_suite(pick(power), o.trials, o.seed);
  else if (s == "star-shaped-orlicz")
    out.report = audits::star_shape_suite(pick({CostModel::orlicz(OrliczFunction::exp_m1_mr())}), o.trials, o.seed);
  else if (s == "calculus")
    out.report = audits::calculus_suite(o.trials, o.seed);
  else if (s == "inf-dist")
    out.report = audits::inf_dist_suite(pick(audits::builtin_costs()), o.trials, o.seed);
  else if (s == "subdifferential")
    out.report = audits::subdifferential_suite(o.trials, o.seed);
  else if (s == "non-crossing")
    out.report = audits::non_crossing_suite(o.trials, o.seed);
  else if (s == "beta")
    out.report = audits::beta_table_suite();
  else if (s == "busemann") {
    const std::vector<double> hz{50.0, 100.0};
    out.report = audits::busemann_suite(hz);
  } else
    throw Error("InvalidParameter", "unknown suite '" + s + "'");
  out.report["suite"] = s;
  out.failed = out.report.at("violations").get<std::size_t>() > 0;
  return out;
}

MetricMeasureSpace load_space_arg(const Options& o) {
  if (!o.space.empty()) return io::space_from_json(io::read_json(o.space));
  if (o.inputs.size() != 1) throw Error("MalformedInput", "expected one space file");
  return io::space_from_json(io::read_json(o.inputs[0]));
}

Output cmd_poincare(const Options& o) {
  const auto space = load_space_arg(o);
  const double K = o.K > 0 ? o.K : 1.0;
  const auto variant = o.variant == "paper" ? PoincareConstant::Paper : PoincareConstant::Corrected;
  if (o.variant != "paper" && o.variant != "corrected")
    throw Error("InvalidParameter", "variant must be 'paper' or 'corrected'");
  const double radius = o.radius > 0 ? o.radius : default_slope_radius(space);
  const auto fam = default_poincare_family(space);
  const auto rep = check_poincare(space, K, o.q, radius, fam, variant);
  Output out;
  out.report["constant"] = poincare_constant(variant, K);
  out.report["K"] = K;
  out.report["worst_ratio"] = rep.worst_ratio;
  out.report["slope"] = "descending slope |D-h| at radius " + io::format_double(radius);
  std::string csv = "h_function_id,ratio\n";
  for (const auto& [id, r] : rep.ratios) {
    out.report["ratios"][id] = r;
    csv += id + "," + io::format_double(r) + "\n";
  }
  out.csv_name = "poincare.csv";
  out.csv = csv;
  out.csv_primary = true;
  const double tol = o.tol < 0 ? 1e-6 : o.tol;
  const bool violated = rep.worst_ratio > 1.0 + tol;
  out.report["stated_constant_violated"] = violated;
  // Only the corrected constant is asserted.
  out.failed = violated && variant == PoincareConstant::Corrected;
  return out;
}

Output cmd_laplacian(const Options& o) {
  const auto space = load_space_arg(o);
  const double p = o.p;
  const double q = p / (p - 1.0);
  std::size_t x0 = o.x0;
  int dim = 1;
  if (const auto* g = std::get_if<EuclideanGrid>(&space.model())) {
    dim = g->dim;
    if (x0 == npos) x0 = space.grid_index({g->counts[0] / 2, g->counts[1] / 2, g->counts[2] / 2});
  }
  if (x0 == npos) x0 = 0;
  if (x0 >= space.size()) throw Error("InvalidParameter", "x0 outside the space");
  std::vector<double> phi(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) phi[i] = std::pow(space.distance(i, x0), p) / p;
  const auto lap = discrete_q_laplacian(space, phi, q);
  Output out;
  out.report["x0"] = x0;
  out.report["q"] = q;
  out.report["calibrated"] = lap.calibrated;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < space.size(); ++i)
    rows.push_back({static_cast<double>(i), space.distance(i, x0), lap.values[i]});
  out.csv_name = "laplacian.csv";
  out.csv = table_csv("index,distance,value", rows);
  if (!lap.calibrated || !space.is_grid()) {
    out.report["label"] = "uncalibrated: no comparison assertion";
    return out;
  }
  // Interior: two layers from the boundary and away from x0.
  const auto& g = std::get<EuclideanGrid>(space.model());
  const double h = g.spacing;
  const double bound = static_cast<double>(dim);  // N * sigma(0, N) with N = dim
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto m = space.grid_multi(i);
    bool inner = space.distance(i, x0) >= 0.1;
    for (int d = 0; d < dim; ++d)
      if (m[d] < 2 || m[d] + 2 >= g.counts[d]) inner = false;
    if (!inner) continue;
    lo = std::min(lo, lap.values[i]);
    hi = std::max(hi, lap.values[i]);
  }
  const double tol = o.tol < 0 ? 10.0 * h : o.tol;
  out.report["interior_min"] = lo;
  out.report["interior_max"] = hi;
  out.report["comparison"] = bound;
  out.report["tolerance"] = tol;
  out.report["verdict"] = lo >= bound - tol && hi <= bound + tol;
  out.failed = !(lo >= bound - tol && hi <= bound + tol);
  return out;
}

Output cmd_brenier(const Options& o) {
  auto [space, mus] = load_pair(o);
  const auto& [mu0, mu1] = mus;
  const auto sol = solve(space, mu0, mu1, CostModel::power(o.p));
  const double radius = o.radius > 0 ? o.radius : default_slope_radius(space);
  const auto rep = metric_brenier_check(space, sol, o.p, radius);
  Output out;
  out.report["pointwise"] = rep.pointwise;
  out.report["worst_excess"] = rep.worst_excess;
  out.report["integral_ratio"] = rep.ratio;
  out.report["slope_integral"] = rep.lhs;
  out.report["transport_integral"] = rep.rhs;
  out.report["slope"] = "ascending slope |D+phi| at radius " + io::format_double(radius);
  out.failed = !rep.pointwise;
  return out;
}

void emit(const std::string& cmd, const Options& o, const Output& out) {
  json rep;
  rep["tool"] = "wassergeo";
  rep["version"] = kVersion;
  rep["seed"] = o.seed;
  rep["convention"] = o.convention;
  rep["config"] = config_json(cmd, o);
  rep["result"] = out.report;
  rep["status"] = out.failed ? "fail" : "ok";
  const std::string text = io::dump(rep);
  if (!o.out.empty()) {
    io::write_text(fs::path(o.out) / "report.json", text);
    if (!out.csv_name.empty()) io::write_text(fs::path(o.out) / out.csv_name, out.csv);
    log(1, "wrote " + o.out);
  } else if (out.csv_primary) {
    std::cout << out.csv;
  } else {
    std::cout << text;
  }
}

int fail_with(const std::string& code, const std::string& message) {
  json e{{"error", {{"code", code}, {"message", message}}}};
  std::cerr << e.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wassergeo: exact discrete optimal transport and inequality audits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "64-bit seed for randomized suites");
    sub->add_option("--threads", o.threads, "worker cap (results do not depend on it)");
    sub->add_option("--out", o.out, "output directory for report.json and CSV tables");
    sub->add_option("--convention", o.convention, "w_p normalization: standard (d^p) or paper (d^p/p)")
        ->check(CLI::IsMember({"standard", "paper"}));
    sub->add_option("--tol", o.tol, "override the audit tolerance");
    sub->add_option("--space", o.space, "space file (overrides embedded spaces)");
  };
  auto cost_flags = [&](CLI::App* sub) {
    sub->add_option("--p", o.p, "exponent of the power cost d^p/p")->check(CLI::PositiveNumber);
    sub->add_option("--cost", o.cost, "cost descriptor, e.g. power:2 or orlicz:exp_m1_mr");
  };

  auto* ot = app.add_subcommand("ot", "optimal transport between two measures");
  ot->add_option("inputs", o.inputs, "two measure files")->required()->expected(2);
  cost_flags(ot);
  common(ot);

  auto* orl = app.add_subcommand("orlicz", "Orlicz-Wasserstein distance");
  orl->add_option("inputs", o.inputs, "two measure files")->required()->expected(2);
  cost_flags(orl);
  orl->add_option("--lambda-tol", o.lambda_tol, "bisection tolerance");
  orl->add_option("--phi", o.phi, "outer function for the comparison check (square, exp_shift)");
  common(orl);

  auto* geo = app.add_subcommand("geodesic", "displacement interpolation and geodesic check");
  geo->add_option("inputs", o.inputs, "two measure files")->required()->expected(2);
  cost_flags(geo);
  geo->add_option("--lambda-tol", o.lambda_tol, "bisection tolerance for Orlicz costs");
  geo->add_option("--t", o.ts, "interpolation times")->delimiter(',');
  common(geo);

  auto* cd = app.add_subcommand("cd-check", "curvature-dimension inequality along a plan");
  cd->add_option("plan", o.inputs, "plan file")->required()->expected(1);
  cost_flags(cd);
  cd->add_option("--K", o.K, "curvature bound");
  cd->add_option("--N", o.N, "dimension bound");
  cd->add_option("--U", o.U, "entropy functional: UN, Uinf, UN:x, Um:x");
  cd->add_option("--t", o.ts, "interpolation times")->delimiter(',');
  cd->add_flag("--weak", o.weak, "weak CD(K,inf) for the Boltzmann entropy");
  common(cd);

  auto* lc = app.add_subcommand("lemma-check", "seeded property suites");
  lc->add_option("--suite", o.suite, "p-dist-ineq, dist-ineq-orlicz, star-shaped, star-shaped-orlicz, calculus, "
                                     "inf-dist, subdifferential, non-crossing, beta, busemann")
      ->required();
  lc->add_option("--trials", o.trials, "trials per case");
  lc->add_option("--cost", o.cost, "restrict to one cost descriptor");
  common(lc);

  auto* pc = app.add_subcommand("poincare", "(2,q)-Poincare audit on a weighted 1D grid");
  pc->add_option("space_file", o.inputs, "space file")->expected(0, 1);
  pc->add_option("--K", o.K, "curvature bound (default 1)");
  pc->add_option("--q", o.q, "gradient exponent");
  pc->add_option("--variant", o.variant, "constant: corrected or paper");
  pc->add_option("--radius", o.radius, "slope radius");
  common(pc);

  auto* lp = app.add_subcommand("laplacian", "q-Laplacian of d^p/p against the flat comparison");
  lp->add_option("space_file", o.inputs, "space file")->expected(0, 1);
  lp->add_option("--p", o.p, "exponent");
  lp->add_option("--x0", o.x0, "base point index (default: grid center)");
  common(lp);

  auto* br = app.add_subcommand("brenier", "metric Brenier slope identity");
  br->add_option("inputs", o.inputs, "two measure files")->required()->expected(2);
  br->add_option("--p", o.p, "exponent");
  br->add_option("--radius", o.radius, "slope radius");
  common(br);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_with("UsageError", e.what());
  }

  thread_cap() = o.threads == 0 ? 1u : o.threads;
  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  log(1, "running " + cmd + " with seed " + std::to_string(o.seed));
  try {
    Output out;
    if (cmd == "ot") out = cmd_ot(o);
    else if (cmd == "orlicz") out = cmd_orlicz(o);
    else if (cmd == "geodesic") out = cmd_geodesic(o);
    else if (cmd == "cd-check") out = cmd_cd_check(o);
    else if (cmd == "lemma-check") out = cmd_lemma_check(o);
    else if (cmd == "poincare") out = cmd_poincare(o);
    else if (cmd == "laplacian") out = cmd_laplacian(o);
    else out = cmd_brenier(o);
    emit(cmd, o, out);
    log(2, std::string("status ") + (out.failed ? "fail" : "ok"));
    return out.failed ? 1 : 0;
  } catch (const Error& e) {
    return fail_with(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail_with("MalformedInput", e.what());
  } catch (const std::invalid_argument& e) {
    return fail_with("MalformedInput", e.what());
  } catch (const std::out_of_range& e) {
    return fail_with("MalformedInput", e.what());
  }
}
