#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "wassergeo/curvature.hpp"

using namespace wassergeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

double gauss(double x, double m, double s) {
  return std::exp(-(x - m) * (x - m) / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
}

/// Standard Gaussian reference on [-5, 5].
MetricMeasureSpace gaussian_line(std::size_t n) {
  const double h = 10.0 / static_cast<double>(n - 1);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = h * gauss(-5.0 + h * static_cast<double>(i), 0, 1);
  return MetricMeasureSpace::euclidean_grid(1, {n, 1, 1}, h, {-5, 0, 0}, w);
}

DiscreteMeasure sampled(const MetricMeasureSpace& s, const std::function<double(double)>& f) {
  DiscreteMeasure m;
  for (std::size_t i = 0; i < s.size(); ++i) m.mass.push_back(f(s.coord(i)[0]) * s.weight(i));
  m.normalize();
  return m;
}

}  // namespace

TEST_CASE("entropy evaluation") {
  const auto s = MetricMeasureSpace::from_matrix(
      {{0, 1, 2, 3}, {1, 0, 1, 2}, {2, 1, 0, 1}, {3, 2, 1, 0}}, {0.25, 0.25, 0.5, 0.0});
  SECTION("reference measure has zero entropy") {
    const auto ref = DiscreteMeasure::reference(s);
    CHECK(entropy_eval(EntropyFunctional::boltzmann(), s, ref) == 0.0);
    for (double N : {1.0, 2.0, 5.0}) CHECK_THAT(entropy_eval(EntropyFunctional::renyi(N), s, ref), WithinAbs(0.0, 1e-15));
  }
  SECTION("singular mass") {
    const auto d = DiscreteMeasure::dirac(4, 3);
    CHECK(entropy_eval(EntropyFunctional::boltzmann(), s, d) == kInf);
    // U_N'(inf) = N
    CHECK(entropy_eval(EntropyFunctional::renyi(3), s, d) == 3.0);
  }
  SECTION("half-uniform on ten points") {
    std::vector<std::vector<double>> dist(10, std::vector<double>(10));
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j) dist[i][j] = i == j ? 0.0 : 1.0;
    const auto u = MetricMeasureSpace::from_matrix(dist, std::vector<double>(10, 0.1));
    DiscreteMeasure m;
    m.mass.assign(10, 0.0);
    for (std::size_t i = 0; i < 5; ++i) m.mass[i] = 0.2;
    CHECK_THAT(entropy_eval(EntropyFunctional::boltzmann(), u, m), WithinAbs(std::log(2.0), 1e-15));
  }
}

TEST_CASE("DC_N membership") {
  const auto grid = log_grid(1e-3, 1e3, 120);
  SECTION("classical entropy at N = inf") {
    CHECK(dc_membership(EntropyFunctional::boltzmann(), kInf, grid).verdict);
  }
  SECTION("U_m with m = 1 - 1/N") {
    for (double N : {2.0, 3.0, 5.0}) CHECK(dc_membership(EntropyFunctional::power(1.0 - 1.0 / N), N, grid).verdict);
  }
  SECTION("U(r) = -r^2 is rejected") {
    const auto bad = EntropyFunctional::custom("neg_sq", [](double r) { return -r * r; }, 0.0, -kInf);
    CHECK_FALSE(dc_membership(bad, 2.0, grid).verdict);
    CHECK(dc_membership(bad, 2.0, grid).worst_defect > 0);
  }
  SECTION("nesting: members of DC_N' are members of DC_N for N <= N'") {
    for (double Np : {2.0, 3.0, 6.0}) {
      const auto U = EntropyFunctional::renyi(Np);
      REQUIRE(dc_membership(U, Np, grid).verdict);
      for (double N = 1.0; N <= Np; N += 0.5) CHECK(dc_membership(U, N, grid).verdict);
    }
    for (double N : {1.0, 2.0, 10.0}) CHECK(dc_membership(EntropyFunctional::power(2.0), N, grid).verdict);
  }
}

TEST_CASE("beta") {
  SECTION("table") {
    for (double t : {0.0, 0.3, 1.0})
      for (double d : {0.0, 0.5, 7.0}) CHECK(beta({0.0, 5.0}, t, d) == 1.0);
    CHECK_THAT(beta({6.0, kInf}, 0.0, 1.0), WithinRel(std::numbers::e, 1e-15));
    CHECK(beta({1.0, 2.0}, 0.5, 4.0) == kInf);
    CHECK(beta({1.0, 1.0}, 0.5, 1.0) == kInf);
    CHECK(beta({0.0, 1.0}, 0.5, 1.0) == 1.0);
    CHECK(beta({-2.0, 1.0}, 0.5, 1.0) == 1.0);
  }
  SECTION("sin and sinh forms") {
    // alpha = sqrt(1/1) * 1 = 1, N - 1 = 1
    CHECK_THAT(beta({1.0, 2.0}, 0.5, 1.0), WithinRel(std::sin(0.5) / (0.5 * std::sin(1.0)), 1e-15));
    CHECK_THAT(beta({-1.0, 2.0}, 0.5, 1.0), WithinRel(std::sinh(0.5) / (0.5 * std::sinh(1.0)), 1e-15));
    CHECK_THAT(beta({2.0, 3.0}, 0.25, 1.5), WithinRel(std::pow(std::sin(0.375) / (0.25 * std::sin(1.5)), 2.0), 1e-14));
  }
  SECTION("continuity at d -> 0") {
    for (double K : {-3.0, -1.0, 0.0, 1.0, 3.0})
      for (double N : {1.5, 2.0, 4.0, kInf})
        for (double t : {0.0, 0.25, 0.5, 0.9}) CHECK(std::abs(beta({K, N}, t, 1e-5) - 1.0) <= 1e-6);
  }
  SECTION("the infinite branch is the limit of beta U(rho / beta)") {
    const double rho = 1.7;
    for (const auto& U : {EntropyFunctional::renyi(3), EntropyFunctional::boltzmann(), EntropyFunctional::power(2.0)}) {
      double prev = kInf;
      for (int k = 1; k <= 8; ++k) {
        const double b = std::pow(10.0, k);
        const double v = distorted(U, b, rho);
        CHECK(v <= prev);
        prev = v;
      }
      if (std::isfinite(U.prime_at_zero)) {
        CHECK_THAT(prev, WithinAbs(U.prime_at_zero * rho, 1e-6));
      } else {
        CHECK(prev < -10.0);
      }
      CHECK(distorted(U, kInf, rho) == U.prime_at_zero * rho);
      CHECK(distorted(U, kInf, 0.0) == 0.0);
    }
  }
}

TEST_CASE("sigma tilde") {
  for (double th : {0.0, 0.4, 3.0}) CHECK(sigma_tilde(0.0, 2.0, th) == 1.0);
  CHECK_THAT(sigma_tilde(1.0, 2.0, std::numbers::pi / 4), WithinRel(0.5 * (1 + std::numbers::pi / 4), 1e-15));
  CHECK_THAT(sigma_tilde(-1.0, 3.0, 1e-6), WithinRel(2.0 / 3.0, 1e-10));
  CHECK_THAT(sigma_tilde(-2.0, 3.0, 1.0), WithinRel((1.0 + 1.0 / std::tanh(1.0)) / 3.0, 1e-15));
  // evaluated literally at theta = 0 for K != 0
  CHECK(sigma_tilde(1.0, 4.0, 0.0) == 0.5);
  CHECK(code_of([] { sigma_tilde(1.0, 2.0, std::numbers::pi); }) == "PoleCrossed");
  CHECK(code_of([] { sigma_tilde(1.0, 1.0, 0.1); }) == "InvalidParameter");
}

TEST_CASE("strong CD along optimal plans") {
  const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  SECTION("t = 0 gives zero residual when K = 0") {
    const auto s = MetricMeasureSpace::interval(0.0, 1.0, 51);
    const auto mu0 = sampled(s, [](double x) { return x < 0.4 ? 1.0 + x : 0.0; });
    const auto mu1 = sampled(s, [](double x) { return x > 0.5 ? 2.0 - x : 0.0; });
    const auto cost = CostModel::power(2);
    const auto plan = build_plan(solve(s, mu0, mu1, cost), cost);
    const auto rep = check_strong_cdp(s, plan, {0.0, 2.0}, EntropyFunctional::renyi(2), ts);
    CHECK_THAT(rep.per_t[0].residual, WithinAbs(0.0, 1e-12));
    CHECK_THAT(rep.per_t[4].residual, WithinAbs(0.0, 1e-12));
  }
  SECTION("1D U_N residual is O(h) and shrinks") {
    double prev = kInf;
    for (std::size_t n : {26, 51, 101}) {
      const auto s = MetricMeasureSpace::interval(0.0, 1.0, n);
      const auto mu0 = sampled(s, [](double x) { return x >= 0.2 && x <= 0.4 ? 1.0 + std::sin(9 * x) / 2 : 0.0; });
      const auto mu1 = sampled(s, [](double x) { return x >= 0.5 && x <= 0.8 ? 1.0 + x : 0.0; });
      double worst = kInf;
      for (double p : {1.5, 2.0, 3.0}) {
        const auto cost = CostModel::power(p);
        const auto plan = build_plan(solve(s, mu0, mu1, cost), cost);
        for (double N : {1.0, 2.0, 4.0})
          worst = std::min(worst, check_strong_cdp(s, plan, {0.0, N}, EntropyFunctional::renyi(N), ts).worst_residual);
      }
      const double h = 1.0 / static_cast<double>(n - 1);
      CHECK(worst >= -2.0 * h);
      CHECK(std::abs(std::min(worst, 0.0)) <= std::max(2.0 * prev, 1e-12));
      prev = std::abs(std::min(worst, 0.0));
    }
  }
  SECTION("singular endpoint") {
    const auto s = MetricMeasureSpace::euclidean_grid(1, {5, 1, 1}, 1.0, {0, 0, 0}, {1, 1, 1, 1, 0});
    DynamicPlan plan;
    plan.atoms = {{0, 4, 1.0}};
    CHECK(code_of([&] { check_strong_cdp(s, plan, {0.0, 2.0}, EntropyFunctional::renyi(2), ts); }) ==
          "SingularEndpoint");
  }
}

TEST_CASE("weak CD(K, inf) on the Gaussian line") {
  const auto s = gaussian_line(1001);
  const std::vector<double> ts{0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  SECTION("mu0 = mu1") {
    const auto mu = sampled(s, [](double x) { return std::exp(0.3 * x); });
    const auto cost = CostModel::power(2);
    const auto plan = build_plan(solve(s, mu, mu, cost), cost);
    for (double K : {0.0, -1.0}) {
      const auto rep = check_weak_cdp_infty(s, plan, K, 0.0, ts);
      for (const auto& sl : rep.per_t) CHECK_THAT(sl.residual, WithinAbs(0.0, 1e-14));
    }
  }
  SECTION("shifted Gaussians: residual 2 t (1 - t)(1 - K)") {
    // relative densities exp(-+x - 1/2): N(-+1, 1) against N(0, 1), W_2^2 = 4
    const auto mu0 = sampled(s, [](double x) { return std::exp(-x - 0.5); });
    const auto mu1 = sampled(s, [](double x) { return std::exp(x - 0.5); });
    const auto cost = CostModel::power(2);
    const auto sol = solve(s, mu0, mu1, cost);
    const auto plan = build_plan(sol, cost);
    const double w = std::sqrt(2.0 * sol.primal);  // cost is d^2 / 2
    CHECK_THAT(w, WithinAbs(2.0, 1e-2));
    const auto tight = check_weak_cdp_infty(s, plan, 1.0, w, ts);
    CHECK(tight.worst_residual >= -1e-3);
    const auto strict = check_weak_cdp_infty(s, plan, 10.0, w, ts);
    CHECK(strict.worst_residual < 0);
    for (const auto& sl : strict.per_t) CHECK_THAT(sl.residual, WithinAbs(-18.0 * sl.t * (1 - sl.t), 2e-2));
  }
}

TEST_CASE("q-Fisher information") {
  const auto s = MetricMeasureSpace::interval(0.0, 1.0, 201);
  const double h = 1.0 / 200;
  SECTION("constant density") {
    CHECK(fisher_q(s, DiscreteMeasure::reference(s), EntropyFunctional::boltzmann(), 2.0, 1.5 * h) == 0.0);
  }
  SECTION("linear density matches the Riemann sum") {
    const auto nu = sampled(s, [](double x) { return 1.0 + x; });
    const auto rho = density(s, nu).rho;
    const double b = (rho[1] - rho[0]) / h;
    double expect = 0.0;
    // the left end has no lower neighbour, so its descending slope is 0
    for (std::size_t i = 1; i < 201; ++i) expect += b * b / rho[i] * s.weight(i);
    CHECK_THAT(fisher_q(s, nu, EntropyFunctional::boltzmann(), 2.0, 1.5 * h), WithinRel(expect, 1e-9));
  }
  SECTION("Gaussian has information 1 / sigma^2") {
    const auto line = MetricMeasureSpace::interval(-3.0, 3.0, 1201);
    const auto nu = sampled(line, [](double x) { return gauss(x, 0, 0.5); });
    CHECK_THAT(fisher_q(line, nu, EntropyFunctional::boltzmann(), 2.0, 1.5 * 0.005), WithinRel(4.0, 2e-2));
  }
  SECTION("zero-weight support") {
    const auto z = MetricMeasureSpace::euclidean_grid(1, {3, 1, 1}, 1.0, {0, 0, 0}, {1, 1, 0});
    CHECK(code_of([&] { fisher_q(z, {{0.5, 0.0, 0.5}}, EntropyFunctional::boltzmann(), 2.0, 1.5); }) ==
          "ZeroDensityInSupport");
  }
}

TEST_CASE("Poincare audit on the Gaussian") {
  const auto s = gaussian_line(2001);
  const double r = 1.5 * s.spacing();
  std::vector<TestFunction> fam{{"x", {}}, {"const", {}}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    fam[0].values.push_back(s.coord(i)[0]);
    fam[1].values.push_back(3.0);
  }
  const auto corrected = check_poincare(s, 1.0, 2.0, r, fam, PoincareConstant::Corrected);
  CHECK(corrected.ratios[0].second >= 0.95);
  CHECK(corrected.ratios[0].second <= 1.0);
  CHECK(corrected.ratios[1].second == 0.0);
  const auto paper = check_poincare(s, 1.0, 2.0, r, fam, PoincareConstant::Paper);
  CHECK_THAT(paper.ratios[0].second, WithinAbs(std::sqrt(2.0), 0.03));
  const auto all = check_poincare(s, 1.0, 2.0, r, default_poincare_family(s), PoincareConstant::Corrected);
  CHECK(all.worst_ratio <= 1.0);
  CHECK(code_of([&] { check_poincare(s, 0.0, 2.0, r, fam, PoincareConstant::Corrected); }) == "InvalidParameter");
}

TEST_CASE("metric Brenier") {
  SECTION("delta to delta") {
    const auto s = MetricMeasureSpace::interval(0.0, 1.0, 51);
    const auto sol = solve(s, DiscreteMeasure::dirac(51, 10), DiscreteMeasure::dirac(51, 30), CostModel::power(2));
    CHECK(metric_brenier_check(s, sol, 2.0, 1.5 / 50).pointwise);
  }
  SECTION("mu0 = mu1") {
    const auto s = MetricMeasureSpace::interval(0.0, 1.0, 51);
    const auto mu = sampled(s, [](double x) { return 1 + x; });
    const auto rep = metric_brenier_check(s, solve(s, mu, mu, CostModel::power(3)), 3.0, 1.5 / 50);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs == 0.0);
    CHECK(rep.pointwise);
  }
  SECTION("uniform shift: ratio tends to 1") {
    for (double p : {1.5, 2.0, 3.0}) {
      double prev = kInf;
      for (std::size_t n : {51, 101}) {
        const auto s = MetricMeasureSpace::interval(0.0, 1.0, n);
        const auto mu0 = sampled(s, [](double x) { return x <= 0.4 ? 1.0 : 0.0; });
        const auto mu1 = sampled(s, [](double x) { return x >= 0.5234 && x <= 0.9234 ? 1.0 : 0.0; });
        const double h = 1.0 / static_cast<double>(n - 1);
        const auto rep = metric_brenier_check(s, solve(s, mu0, mu1, CostModel::power(p)), p, 1.5 * h);
        CHECK(rep.pointwise);
        CHECK(std::abs(rep.ratio - 1.0) < prev);
        prev = std::abs(rep.ratio - 1.0);
      }
      CHECK(prev <= 0.1);
    }
  }
}

TEST_CASE("discrete q-Laplacian") {
  SECTION("constants are harmonic") {
    const auto s = MetricMeasureSpace::euclidean_grid(2, {11, 11, 1}, 0.1);
    for (double q : {1.5, 2.0, 3.0})
      for (double v : discrete_q_laplacian(s, std::vector<double>(s.size(), 2.5), q).values) CHECK(v == 0.0);
  }
  SECTION("x^2 / 2 in 1D") {
    const auto s = MetricMeasureSpace::interval(0.0, 1.0, 41);
    std::vector<double> f;
    for (std::size_t i = 0; i < 41; ++i) f.push_back(0.5 * s.coord(i)[0] * s.coord(i)[0]);
    const auto lap = discrete_q_laplacian(s, f, 2.0);
    CHECK(lap.calibrated);
    for (std::size_t i = 1; i < 40; ++i) CHECK_THAT(lap.values[i], WithinAbs(1.0, 1e-9));
  }
  SECTION("d^p / p on a 2D grid is close to 2 away from the centre") {
    const std::size_t n = 81;
    const double h = 1.0 / (n - 1);
    const auto s = MetricMeasureSpace::euclidean_grid(2, {n, n, 1}, h, {-0.5, -0.5, 0});
    const std::size_t x0 = s.grid_index({40, 40, 0});
    for (double p : {1.5, 2.0, 3.0}) {
      const double q = p / (p - 1);
      std::vector<double> f(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) f[i] = std::pow(s.distance(i, x0), p) / p;
      const auto lap = discrete_q_laplacian(s, f, q);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto m = s.grid_multi(i);
        if (m[0] < 2 || m[1] < 2 || m[0] > n - 3 || m[1] > n - 3 || s.distance(i, x0) < 0.1) continue;
        CHECK(lap.values[i] >= 2.0 - 10 * h);
        CHECK(lap.values[i] <= 2.0 + 10 * h);
      }
    }
  }
  SECTION("graphs are uncalibrated and raw metrics are rejected") {
    const auto g = MetricMeasureSpace::graph(3, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}});
    const auto lap = discrete_q_laplacian(g, std::vector<double>{0.0, 1.0, 3.0}, 2.0);
    CHECK_FALSE(lap.calibrated);
    CHECK(lap.values == std::vector<double>{1.0, 1.0, -2.0});
    const auto raw = MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}}, {1, 1});
    CHECK(code_of([&] { discrete_q_laplacian(raw, std::vector<double>{0, 1}, 2.0); }) == "UncalibratedGraph");
  }
}
