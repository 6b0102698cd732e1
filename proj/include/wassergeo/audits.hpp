#pragma once

// Seeded property suites over the lemma-level inequalities. Each suite
// returns a JSON report with a violation count; identical seeds give
// identical reports regardless of the worker count.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wassergeo/cost.hpp"
#include "wassergeo/curvature.hpp"
#include "wassergeo/interpolation.hpp"
#include "wassergeo/io.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/orlicz.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo::audits {

using json = nlohmann::json;

/// Random metric on n points: a connected random graph with uniform edge
/// lengths in [0.1, 1], completed by shortest paths.
inline MetricMeasureSpace random_metric_space(std::size_t n, SplitMix64& rng, double density = 0.3) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  auto link = [&](std::size_t i, std::size_t j) {
    const double w = rng.uniform(0.1, 1.0);
    d[i][j] = d[j][i] = std::min(d[i][j], w);
  };
  for (std::size_t i = 1; i < n; ++i) link(i, rng.below(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < density) link(i, j);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return MetricMeasureSpace::from_matrix(std::move(d), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Random probability vector; about `sparsity` of the entries are zero.
inline DiscreteMeasure random_measure(std::size_t n, SplitMix64& rng, double sparsity = 0.0) {
  DiscreteMeasure m;
  m.mass.assign(n, 0.0);
  for (auto& v : m.mass) v = rng.uniform() < sparsity ? 0.0 : rng.uniform(0.05, 1.0);
  if (std::all_of(m.mass.begin(), m.mass.end(), [](double v) { return v == 0.0; })) m.mass[rng.below(n)] = 1.0;
  m.normalize();
  return m;
}

/// Random weighted graph with n vertices, a spanning path and extra chords.
inline MetricMeasureSpace random_graph(std::size_t n, SplitMix64& rng) {
  std::vector<GraphEdge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({rng.below(i), i, rng.uniform(0.05, 0.3), 1.0});
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t u = rng.below(n), v = rng.below(n);
    if (u != v) edges.push_back({u, v, rng.uniform(0.05, 0.3), 1.0});
  }
  return MetricMeasureSpace::graph(n, std::move(edges));
}

/// The three model spaces used by the distance-inequality suites, scaled to
/// diameter about one.
inline std::vector<std::pair<std::string, MetricMeasureSpace>> model_spaces(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<std::string, MetricMeasureSpace>> out;
  out.emplace_back("euclidean_grid", MetricMeasureSpace::euclidean_grid(2, {41, 41, 1}, 1.0 / 40.0 / std::sqrt(2.0)));
  out.emplace_back("circle", MetricMeasureSpace::circle(1.0 / std::numbers::pi, 360));
  out.emplace_back("graph", random_graph(40, rng));
  return out;
}

inline std::vector<CostModel> builtin_costs() {
  return {CostModel::power(1.5), CostModel::power(2.0), CostModel::power(3.0),
          CostModel::orlicz(OrliczFunction::exp_m1_mr()), CostModel::orlicz(OrliczFunction::cosh_m1())};
}

/// Distance inequality at exact t-fraction points: residuals below -slack
/// count as violations; m = x must give equality to within slack.
inline json dist_ineq_suite(const std::vector<CostModel>& costs, std::size_t trials, std::uint64_t seed,
                            double slack = 1e-12) {
  json rep;
  std::size_t violations = 0;
  for (const auto& [name, space] : model_spaces(seed)) {
    for (const auto& cost : costs) {
      SplitMix64 rng(seed ^ fnv1a(name + cost.describe()));
      const double t_min = cost.is_power() ? 0.1 : 0.25;
      double worst = kInf, worst_eq = 0.0;
      std::size_t bad = 0;
      for (std::size_t k = 0; k < trials; ++k) {
        const std::size_t m = rng.below(space.size()), x = rng.below(space.size()), y = rng.below(space.size());
        const double t = rng.uniform(t_min, 1.0);
        const Location z = space.interpolate(x, y, t);
        const double dxy = space.distance(x, y);
        const double r = distance_inequality_residual(space.distance(m, z), dxy, space.distance(m, y), t, cost);
        const double eq = distance_inequality_residual(space.distance(x, z), dxy, space.distance(x, y), t, cost);
        worst = std::min(worst, r);
        worst_eq = std::max(worst_eq, std::abs(eq));
        if (r < -slack || std::abs(eq) > slack) ++bad;
      }
      violations += bad;
      rep["cases"].push_back({{"space", name}, {"cost", cost.describe()}, {"trials", trials},
                              {"min_residual", worst}, {"max_equality_residual", worst_eq}, {"violations", bad}});
    }
  }
  rep["violations"] = violations;
  return rep;
}

/// Star-shapedness of potentials phi = psi^cbar on a 1D grid of 101 points.
inline json star_shape_suite(const std::vector<CostModel>& costs, std::size_t potentials, std::uint64_t seed,
                             double tol_power = 1e-9, double tol_orlicz = 1e-8) {
  const auto space = MetricMeasureSpace::interval(0.0, 1.0, 101);
  const auto X = all_points(space);
  json rep;
  std::size_t violations = 0;
  for (const auto& cost : costs) {
    SplitMix64 rng(seed ^ fnv1a(cost.describe()));
    const double scale = cost(1.0);
    const double tol = cost.is_power() ? tol_power : tol_orlicz;
    double worst = 0.0;
    std::size_t bad = 0;
    const auto C = CostMatrix::build(space, X, X, cost);
    for (std::size_t k = 0; k < potentials; ++k) {
      std::vector<double> psi(X.size());
      for (auto& v : psi) v = rng.uniform(-0.5, 0.5) * scale;
      Potential phi{X, cbar_transform(std::span<const double>(psi), X.size(), C)};
      for (double t : {0.25, 0.5, 0.75}) {
        const auto r = star_shape_audit(space, phi, X, t, cost, tol);
        worst = std::max(worst, r.deviation);
        if (!r.verdict) ++bad;
      }
    }
    violations += bad;
    rep["cases"].push_back({{"cost", cost.describe()}, {"potentials", potentials}, {"max_deviation", worst},
                            {"violations", bad}});
  }
  rep["violations"] = violations;
  return rep;
}

/// phi <= phi^{c cbar} and phi^{c cbar c} = phi^c on random spaces and
/// potentials, for every built-in cost.
inline json calculus_suite(std::size_t potentials, std::uint64_t seed, double tol = 1e-12) {
  SplitMix64 rng(seed);
  json rep;
  std::size_t violations = 0;
  double worst_dom = 0.0, worst_idem = 0.0;
  const auto costs = builtin_costs();
  for (std::size_t k = 0; k < potentials; ++k) {
    const auto space = random_metric_space(10 + rng.below(30), rng);
    const auto& cost = costs[k % costs.size()];
    const std::size_t n = space.size();
    std::vector<std::size_t> X, Y;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.6) X.push_back(i);
      if (rng.uniform() < 0.6) Y.push_back(i);
    }
    if (X.empty()) X.push_back(0);
    if (Y.empty()) Y.push_back(n - 1);
    const auto C = CostMatrix::build(space, X, Y, cost);
    std::vector<double> phi(X.size());
    for (auto& v : phi) v = rng.uniform(-1.0, 1.0);
    const auto c1 = c_transform(std::span<const double>(phi), Y.size(), C);
    const auto cc = cbar_transform(std::span<const double>(c1), X.size(), C);
    const auto ccc = c_transform(std::span<const double>(cc), Y.size(), C);
    bool bad = false;
    for (std::size_t i = 0; i < X.size(); ++i) {
      worst_dom = std::max(worst_dom, phi[i] - cc[i]);
      if (phi[i] > cc[i] + tol) bad = true;
    }
    for (std::size_t j = 0; j < Y.size(); ++j) {
      worst_idem = std::max(worst_idem, std::abs(ccc[j] - c1[j]));
      if (std::abs(ccc[j] - c1[j]) > tol) bad = true;
    }
    if (bad) ++violations;
  }
  rep["potentials"] = potentials;
  rep["max_domination_excess"] = worst_dom;
  rep["max_idempotence_error"] = worst_idem;
  rep["violations"] = violations;
  return rep;
}

/// h = f_t - s(t) f_1 attains its minimum at x on every model space.
inline json inf_dist_suite(const std::vector<CostModel>& costs, std::size_t trials, std::uint64_t seed,
                           double tol = 1e-12) {
  json rep;
  std::size_t violations = 0;
  for (const auto& [name, space] : model_spaces(seed)) {
    for (const auto& cost : costs) {
      SplitMix64 rng(seed ^ fnv1a(name + cost.describe() + "inf"));
      std::size_t bad = 0;
      double worst = 0.0;
      for (std::size_t k = 0; k < trials; ++k) {
        const std::size_t x = rng.below(space.size()), y = rng.below(space.size());
        const double t = rng.uniform(cost.is_power() ? 0.1 : 0.25, 1.0);
        const auto r = inf_dist_min_audit(space, x, y, t, cost, tol);
        worst = std::max(worst, r.value_at_x - r.minimum);
        if (!r.verdict) ++bad;
      }
      violations += bad;
      rep["cases"].push_back({{"space", name}, {"cost", cost.describe()}, {"trials", trials}, {"max_gap", worst},
                              {"violations", bad}});
    }
  }
  rep["violations"] = violations;
  return rep;
}

/// y in d^c phi(x) iff x in d^cbar phi^c(y), exhaustively on small spaces.
inline json subdifferential_suite(std::size_t spaces, std::uint64_t seed) {
  SplitMix64 rng(seed);
  json rep;
  std::size_t violations = 0, pairs = 0;
  for (std::size_t k = 0; k < spaces; ++k) {
    const auto space = random_metric_space(20 + rng.below(40), rng);
    const auto cost = builtin_costs()[k % 5];
    const auto X = all_points(space);
    const auto C = CostMatrix::build(space, X, X, cost);
    std::vector<double> psi(X.size());
    for (auto& v : psi) v = rng.uniform(-0.3, 0.3);
    const auto phi = cbar_transform(std::span<const double>(psi), X.size(), C);
    const auto phic = c_transform(std::span<const double>(phi), X.size(), C);
    const auto phicc = cbar_transform(std::span<const double>(phic), X.size(), C);
    const double tol = 1e-12;
    for (std::size_t x = 0; x < X.size(); ++x) {
      const auto sub = subdifferential(std::span<const double>(phi), X.size(), x, C, tol);
      std::vector<char> in(X.size(), 0);
      for (auto y : sub) in[y] = 1;
      for (std::size_t y = 0; y < X.size(); ++y) {
        const bool back = std::abs(phic[y] + phicc[x] - C(x, y)) <= tol;
        if (static_cast<bool>(in[y]) != back) ++violations;
        ++pairs;
      }
    }
  }
  rep["pairs"] = pairs;
  rep["violations"] = violations;
  return rep;
}

/// Busemann functions of the ray t -> t on a truncated line [-20, T].
inline json busemann_suite(std::span<const double> horizons, double h = 0.01, double tol_power = 1e-6,
                           double tol_orlicz = 1e-5) {
  json rep;
  std::size_t violations = 0;
  for (double T : horizons) {
    const auto n = static_cast<std::size_t>(std::llround((T + 20.0) / h)) + 1;
    const auto space = MetricMeasureSpace::euclidean_grid(1, {n, 1, 1}, h, {-20.0, 0, 0});
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = space.coord(i)[0];
      if (x >= -3.0 - 1e-9 && x <= 3.0 + 1e-9) window.push_back(i);
    }
    auto ray = [&](double t) {
      Location l;
      l.coord = {t, 0, 0};
      l.anchor = space.snap(l).first;
      return l;
    };
    const std::vector<double> hz{T / 4.0, T / 2.0, T};
    for (const auto& cost : {CostModel::power(1.5), CostModel::power(2.0), CostModel::power(3.0),
                             CostModel::orlicz(OrliczFunction::exp_m1_mr())}) {
      const double tol = cost.is_power() ? tol_power : tol_orlicz;
      json c{{"T", T}, {"cost", cost.describe()}};
      try {
        const auto r = busemann_audit(space, ray, hz, window, cost, tol);
        double limit_err = 0.0;
        for (auto i : window) limit_err = std::max(limit_err, std::abs(r.b[i] + space.coord(i)[0]));
        c["deviation"] = r.deviation;
        c["stabilization"] = r.stabilization;
        c["monotone"] = r.monotone;
        c["limit_error"] = limit_err;
        const bool ok = r.deviation <= tol && r.monotone;
        c["pass"] = ok;
        if (!ok) ++violations;
      } catch (const Error& e) {
        c["error"] = e.code();
        c["pass"] = false;
        ++violations;
      }
      rep["cases"].push_back(c);
    }
  }
  rep["violations"] = violations;
  return rep;
}

/// Optimal plans on Euclidean grids and circles have no interior collisions
/// between atoms with different endpoint pairs.
inline json non_crossing_suite(std::size_t instances, std::uint64_t seed) {
  SplitMix64 rng(seed);
  json rep;
  std::size_t collisions = 0;
  const std::vector<double> ts{0.1, 0.25, 0.5, 0.75, 0.9};
  std::vector<MetricMeasureSpace> spaces;
  spaces.push_back(MetricMeasureSpace::interval(0.0, 1.0, 61));
  spaces.push_back(MetricMeasureSpace::euclidean_grid(2, {16, 16, 1}, 1.0 / 15.0));
  spaces.push_back(MetricMeasureSpace::circle(1.0, 90));
  for (std::size_t k = 0; k < instances; ++k) {
    const auto& space = spaces[k % spaces.size()];
    const auto mu0 = random_measure(space.size(), rng, 0.7);
    const auto mu1 = random_measure(space.size(), rng, 0.7);
    const double p = std::array<double, 3>{1.5, 2.0, 3.0}[k % 3];
    const auto sol = solve(space, mu0, mu1, CostModel::power(p));
    const auto plan = build_plan(sol, CostModel::power(p));
    collisions += check_no_crossing(space, plan, ts, 1e-9).count;
  }
  rep["instances"] = instances;
  rep["collisions"] = collisions;
  rep["violations"] = collisions;
  return rep;
}

inline json beta_table_suite() {
  json rep;
  std::size_t violations = 0;
  auto expect = [&](const std::string& id, bool ok) {
    rep["checks"].push_back({{"id", id}, {"pass", ok}});
    if (!ok) ++violations;
  };
  for (double N : {1.5, 2.0, 5.0, 10.0})
    for (double t : {0.0, 0.3, 1.0})
      for (double d : {0.0, 0.5, 3.0}) expect("K0", beta({0.0, N}, t, d) == 1.0);
  expect("alpha_gt_pi", beta({1.0, 2.0}, 0.5, 4.0) == kInf);
  expect("alpha_gt_pi_t0", beta({1.0, 3.0}, 0.0, 5.0) == kInf);
  for (double K : {0.0, -1.0, -7.0}) expect("N1_K_nonpositive", beta({K, 1.0}, 0.4, 2.0) == 1.0);
  expect("N1_K_positive", beta({1.0, 1.0}, 0.4, 2.0) == kInf);
  for (double N : {1.5, 2.0, 4.0})
    for (double th : {0.0, 0.5, 10.0}) expect("sigma_K0", sigma_tilde(0.0, N, th) == 1.0);
  bool flagged = false;
  try {
    sigma_tilde(1.0, 2.0, std::numbers::pi);
  } catch (const Error& e) {
    flagged = e.code() == "PoleCrossed";
  }
  expect("sigma_pole", flagged);
  rep["violations"] = violations;
  return rep;
}

}  // namespace wassergeo::audits
