#pragma once

// Curvature-dimension audits: displacement-convexity classes, distortion
// coefficients, CD inequalities along discrete plans, Fisher information,
// Poincare ratios, the metric Brenier identity and a discrete q-Laplacian.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wassergeo/core.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/interpolation.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo {

/// Convex U on [0, inf) with U(0) = 0.
struct EntropyFunctional {
  enum class Kind { UN, UInf, Um, Custom };

  Kind kind = Kind::UInf;
  double param = 0.0;  // N for UN, m for Um
  std::string name;
  std::function<double(double)> U;
  std::function<double(double)> U2;  // second derivative on (0, inf)
  double prime_at_zero = -kInf;      // right derivative U'(0)
  double slope_at_infinity = kInf;   // U'(inf)

  double operator()(double r) const { return r <= 0 ? 0.0 : U(r); }

  /// U_N(r) = N r (1 - r^{-1/N}).
  static EntropyFunctional renyi(double N) {
    if (!(N >= 1)) throw Error("InvalidParameter", "U_N needs N >= 1");
    EntropyFunctional e;
    e.kind = Kind::UN;
    e.param = N;
    e.name = "UN:" + OrliczFunction::format_param(N);
    e.U = [N](double r) { return N * r - N * std::pow(r, 1.0 - 1.0 / N); };
    e.U2 = [N](double r) { return (N - 1.0) / N * std::pow(r, -1.0 - 1.0 / N); };
    e.prime_at_zero = -kInf;
    e.slope_at_infinity = N;
    return e;
  }

  /// U_inf(r) = r log r.
  static EntropyFunctional boltzmann() {
    EntropyFunctional e;
    e.kind = Kind::UInf;
    e.name = "Uinf";
    e.U = [](double r) { return r * std::log(r); };
    e.U2 = [](double r) { return 1.0 / r; };
    e.prime_at_zero = -kInf;
    e.slope_at_infinity = kInf;
    return e;
  }

  /// U_m(r) = r^m / (m (m - 1)).
  static EntropyFunctional power(double m) {
    if (m == 0.0 || m == 1.0) throw Error("InvalidParameter", "U_m needs m outside {0, 1}");
    EntropyFunctional e;
    e.kind = Kind::Um;
    e.param = m;
    e.name = "Um:" + OrliczFunction::format_param(m);
    e.U = [m](double r) { return std::pow(r, m) / (m * (m - 1.0)); };
    e.U2 = [m](double r) { return std::pow(r, m - 2.0); };
    e.prime_at_zero = m > 1 ? 0.0 : -kInf;
    e.slope_at_infinity = m > 1 ? kInf : 0.0;
    return e;
  }

  static EntropyFunctional custom(std::string name, std::function<double(double)> U, double prime_at_zero,
                                  double slope_at_infinity) {
    EntropyFunctional e;
    e.kind = Kind::Custom;
    e.name = std::move(name);
    e.U = std::move(U);
    e.prime_at_zero = prime_at_zero;
    e.slope_at_infinity = slope_at_infinity;
    return e;
  }

  static EntropyFunctional by_name(const std::string& s, double N) {
    if (s == "UN") return renyi(N);
    if (s == "Uinf") return boltzmann();
    if (s.rfind("UN:", 0) == 0) return renyi(std::stod(s.substr(3)));
    if (s.rfind("Um:", 0) == 0) return power(std::stod(s.substr(3)));
    throw Error("InvalidParameter", "unknown entropy functional '" + s + "'");
  }
};

/// U_mu(nu) = sum U(rho) w + U'(inf) nu_s(M).
inline double entropy_eval(const EntropyFunctional& U, const MetricMeasureSpace& space, const DiscreteMeasure& nu) {
  const auto d = density(space, nu);
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (d.rho[i] > 0) total += U(d.rho[i]) * space.weight(i);
  if (d.singular > 0) {
    if (U.slope_at_infinity == kInf) return kInf;
    total += U.slope_at_infinity * d.singular;
  }
  return total;
}

struct MembershipReport {
  bool verdict = false;
  double worst_defect = 0.0;
};

/// Midpoint convexity of psi(l) = l^N U(l^{-N}) (N finite) or
/// psi(l) = e^l U(e^{-l}) (N = inf) over all pairs of the grid. For N = inf
/// the grid is read in logarithmic coordinates, l = log(g).
inline MembershipReport dc_membership(const EntropyFunctional& U, double N, std::span<const double> grid,
                                      double rel_tol = 1e-9) {
  std::vector<double> lam(grid.begin(), grid.end());
  const bool infinite = !std::isfinite(N);
  if (infinite)
    for (auto& l : lam) l = std::log(l);
  auto psi = [&](double l) {
    if (infinite) return std::exp(l) * U(std::exp(-l));
    return std::pow(l, N) * U(std::pow(l, -N));
  };
  MembershipReport rep;
  for (std::size_t i = 0; i < lam.size(); ++i)
    for (std::size_t j = i + 1; j < lam.size(); ++j) {
      const double a = psi(lam[i]), b = psi(lam[j]);
      const double mid = psi(0.5 * (lam[i] + lam[j]));
      const double avg = 0.5 * (a + b);
      const double defect = (mid - avg) / (1.0 + std::abs(avg));
      rep.worst_defect = std::max(rep.worst_defect, defect);
    }
  rep.verdict = rep.worst_defect <= rel_tol;
  return rep;
}

/// Curvature and dimension bounds; N = inf is allowed.
struct DistortionParams {
  double K = 0.0;
  double N = kInf;

  double alpha(double d) const { return std::sqrt(std::abs(K) / (N - 1.0)) * d; }
};

/// Distortion coefficient beta_t for two points at distance d.
inline double beta(const DistortionParams& prm, double t, double d) {
  const double K = prm.K, N = prm.N;
  if (N < 1) throw Error("InvalidParameter", "N must be at least 1");
  if (!std::isfinite(N)) return std::exp(K * (1.0 - t * t) * d * d / 6.0);
  if (N == 1.0) return K > 0 ? kInf : 1.0;
  if (K == 0.0) return 1.0;
  const double a = prm.alpha(d);
  if (a == 0.0 || t == 1.0) return 1.0;
  if (K > 0) {
    if (a > std::numbers::pi) return kInf;
    const double s = std::sin(a);
    if (s <= 0.0) return kInf;
    const double ratio = t == 0.0 ? a / s : std::sin(t * a) / (t * s);
    return std::pow(ratio, N - 1.0);
  }
  const double ratio = t == 0.0 ? a / std::sinh(a) : std::sinh(t * a) / (t * std::sinh(a));
  return std::pow(ratio, N - 1.0);
}

/// beta U(rho / beta), with the beta = inf term read as U'(0) rho.
inline double distorted(const EntropyFunctional& U, double b, double rho) {
  if (b == kInf) {
    if (rho == 0.0) return 0.0;
    return U.prime_at_zero * rho;
  }
  return b * U(rho / b);
}

/// Comparison profile for the q-Laplacian of c_p-concave functions.
inline double sigma_tilde(double K, double N, double theta) {
  if (!(N > 1) || !std::isfinite(N)) throw Error("InvalidParameter", "sigma needs N in (1, inf)");
  if (K == 0.0) return 1.0;
  const double a = theta * std::sqrt(std::abs(K) / (N - 1.0));
  if (a == 0.0) return 2.0 / N;
  if (K > 0) {
    if (a >= std::numbers::pi) throw Error("PoleCrossed", "theta sqrt(K/(N-1)) reached the cotangent pole");
    return (1.0 + a / std::tan(a)) / N;
  }
  return (1.0 + a / std::tanh(a)) / N;
}

struct CDSlice {
  double t = 0.0;
  double lhs = 0.0;  // U(mu_t)
  double rhs = 0.0;
  double residual = 0.0;
};

struct CDReport {
  double worst_residual = kInf;
  std::vector<CDSlice> per_t;
  bool verdict = false;
};

/// Strong CD_p(K, N) inequality along a plan with absolutely continuous
/// endpoints: residual(t) = RHS - U(mu_t).
inline CDReport check_strong_cdp(const MetricMeasureSpace& space, const DynamicPlan& plan,
                                 const DistortionParams& prm, const EntropyFunctional& U,
                                 std::span<const double> ts, double tol = 0.0, Deposit mode = Deposit::Linear) {
  DiscreteMeasure mu0, mu1;
  mu0.mass.assign(space.size(), 0.0);
  mu1.mass.assign(space.size(), 0.0);
  for (const auto& a : plan.atoms) {
    mu0.mass[a.x] += a.mass;
    mu1.mass[a.y] += a.mass;
  }
  const auto d0 = density(space, mu0);
  const auto d1 = density(space, mu1);
  if (d0.singular > 0 || d1.singular > 0) throw Error("SingularEndpoint", "endpoint measure has singular mass");

  CDReport rep;
  for (double t : ts) {
    CDSlice s;
    s.t = t;
    const auto mu_t = displace(space, plan, t, mode).measure;
    s.lhs = entropy_eval(U, space, mu_t);
    double first = 0.0, second = 0.0;
    for (const auto& a : plan.atoms) {
      const double d = space.distance(a.x, a.y);
      const double r0 = d0.rho[a.x], r1 = d1.rho[a.y];
      first += a.mass * distorted(U, beta(prm, 1.0 - t, d), r0) / r0;
      second += a.mass * distorted(U, beta(prm, t, d), r1) / r1;
    }
    s.rhs = (1.0 - t) * first + t * second;
    s.residual = s.rhs - s.lhs;
    rep.worst_residual = std::min(rep.worst_residual, s.residual);
    rep.per_t.push_back(s);
  }
  rep.verdict = rep.worst_residual >= -tol;
  return rep;
}

/// Weak CD(K, inf) along the plan for the Boltzmann entropy:
/// residual(t) = (1-t) U(mu_0) + t U(mu_1) - K/2 t(1-t) w^2 - U(mu_t).
inline CDReport check_weak_cdp_infty(const MetricMeasureSpace& space, const DynamicPlan& plan, double K, double w,
                                     std::span<const double> ts, double tol = 0.0,
                                     Deposit mode = Deposit::Linear) {
  const auto U = EntropyFunctional::boltzmann();
  const auto mu0 = displace(space, plan, 0.0).measure;
  const auto mu1 = displace(space, plan, 1.0).measure;
  if (density(space, mu0).singular > 0 || density(space, mu1).singular > 0)
    throw Error("SingularEndpoint", "endpoint measure has singular mass");
  const double e0 = entropy_eval(U, space, mu0), e1 = entropy_eval(U, space, mu1);
  CDReport rep;
  for (double t : ts) {
    CDSlice s;
    s.t = t;
    s.lhs = entropy_eval(U, space, displace(space, plan, t, mode).measure);
    s.rhs = (1.0 - t) * e0 + t * e1 - 0.5 * K * t * (1.0 - t) * w * w;
    s.residual = s.rhs - s.lhs;
    rep.worst_residual = std::min(rep.worst_residual, s.residual);
    rep.per_t.push_back(s);
  }
  rep.verdict = rep.worst_residual >= -tol;
  return rep;
}

/// q-Fisher information sum rho U''(rho)^q |D^- rho|^q w over supp nu.
inline double fisher_q(const MetricMeasureSpace& space, const DiscreteMeasure& nu, const EntropyFunctional& U,
                       double q, double radius) {
  if (!U.U2) throw Error("InvalidParameter", "entropy functional has no second derivative");
  const auto d = density(space, nu);
  if (d.singular > 0) throw Error("ZeroDensityInSupport", "measure charges points of zero reference weight");
  const auto sl = slopes(space, d.rho, radius);
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (nu.mass[i] <= 0) continue;
    total += d.rho[i] * std::pow(U.U2(d.rho[i]), q) * std::pow(sl.minus[i], q) * space.weight(i);
  }
  return total;
}

enum class PoincareConstant { Paper, Corrected };

inline double poincare_constant(PoincareConstant v, double K) {
  return v == PoincareConstant::Paper ? 1.0 / std::sqrt(2.0 * K) : 1.0 / std::sqrt(K);
}

struct TestFunction {
  std::string id;
  std::vector<double> values;
};

struct PoincareReport {
  double worst_ratio = 0.0;
  std::vector<std::pair<std::string, double>> ratios;
};

/// ratio = ||h - mean||_2 / (C ||D^- h||_q) over the normalized reference.
inline PoincareReport check_poincare(const MetricMeasureSpace& space, double K, double q, double radius,
                                     std::span<const TestFunction> family, PoincareConstant variant) {
  if (!(K > 0)) throw Error("InvalidParameter", "Poincare audit needs K > 0");
  const double C = poincare_constant(variant, K);
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) total += space.weight(i);
  PoincareReport rep;
  for (const auto& f : family) {
    double mean = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) mean += f.values[i] * space.weight(i) / total;
    const auto sl = slopes(space, f.values, radius);
    double var = 0.0, grad = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double w = space.weight(i) / total;
      var += (f.values[i] - mean) * (f.values[i] - mean) * w;
      grad += std::pow(sl.minus[i], q) * w;
    }
    const double num = std::sqrt(var);
    const double den = C * std::pow(grad, 1.0 / q);
    // constant h is 0/0, read as 0
    const double ratio = num <= 1e-12 * (1.0 + std::abs(mean)) ? 0.0 : num / den;
    rep.ratios.emplace_back(f.id, ratio);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  }
  return rep;
}

/// Standard test family on a 1D space: monomials, Hermite-type polynomials,
/// a sine and two bumps.
inline std::vector<TestFunction> default_poincare_family(const MetricMeasureSpace& space) {
  std::vector<TestFunction> fam;
  auto add = [&](const std::string& id, const std::function<double(double)>& f) {
    TestFunction t;
    t.id = id;
    for (std::size_t i = 0; i < space.size(); ++i) t.values.push_back(f(space.coord(i)[0]));
    fam.push_back(std::move(t));
  };
  add("x", [](double x) { return x; });
  add("x2", [](double x) { return x * x; });
  add("x3", [](double x) { return x * x * x; });
  add("hermite3", [](double x) { return x * x * x - 3.0 * x; });
  add("sin", [](double x) { return std::sin(x); });
  add("bump", [](double x) { return std::exp(-x * x); });
  add("shifted_bump", [](double x) { return std::exp(-(x - 1.0) * (x - 1.0) / 0.5); });
  add("abs", [](double x) { return std::abs(x); });
  return fam;
}

struct BrenierReport {
  bool pointwise = true;
  double worst_excess = 0.0;  // max |D+phi|(x) - d^{p-1} - slack
  double ratio = 0.0;         // sum |D+phi|^q dmu0 / sum d^p dpi
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Metric Brenier identity for a c_p plan: |D+phi|(x)^q against d(x,y)^p.
/// The slope slack per atom is the exact one-sided bound
/// ((d + r)^p - d^p) / (p r) - d^{p-1} for neighbor radius r.
inline BrenierReport metric_brenier_check(const MetricMeasureSpace& space, const OTSolution& sol, double p,
                                          double radius) {
  const CostModel cost = CostModel::power(p);
  const double q = cost.q();
  const auto phi = kantorovich_potential(space, sol, cost);
  const auto sl = slopes(space, phi, radius);
  BrenierReport rep;
  rep.worst_excess = -kInf;
  std::vector<double> mu0(space.size(), 0.0);
  for (const auto& e : sol.coupling.entries) {
    const double d = space.distance(e.x, e.y);
    const double slack = (std::pow(d + radius, p) - std::pow(d, p)) / (p * radius) - std::pow(d, p - 1.0);
    const double excess = sl.plus[e.x] - std::pow(d, p - 1.0) - slack;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (excess > 1e-9 * (1.0 + std::pow(d, p - 1.0))) rep.pointwise = false;
    rep.rhs += e.mass * std::pow(d, p);
    mu0[e.x] += e.mass;
  }
  for (std::size_t i = 0; i < space.size(); ++i)
    if (mu0[i] > 0) rep.lhs += std::pow(sl.plus[i], q) * mu0[i];
  rep.ratio = rep.rhs == 0.0 ? (rep.lhs == 0.0 ? 1.0 : kInf) : rep.lhs / rep.rhs;
  return rep;
}

struct LaplacianResult {
  std::vector<double> values;
  bool calibrated = false;
};

/// Discrete q-Laplacian. On grids and circles the operator is the flux form
///   sum_j h^{-2} |grad phi|_{ij}^{q-2} (phi_j - phi_i)
/// over nearest neighbors, with the gradient at the edge midpoint built from
/// the edge difference and averaged transverse central differences; it
/// reduces to h^{-q} |phi_j - phi_i|^{q-2} (phi_j - phi_i) in one dimension
/// and to the standard 5-point Laplacian for q = 2. Weighted graphs use
/// sum_j w_ij |(phi_j - phi_i)/l_ij|^{q-2} (phi_j - phi_i) / l_ij^2 and are
/// reported as uncalibrated. Boundary points are left at zero.
inline LaplacianResult discrete_q_laplacian(const MetricMeasureSpace& space, std::span<const double> phi, double q) {
  if (phi.size() != space.size()) throw Error("SizeMismatch", "function length does not match space");
  LaplacianResult res;
  res.values.assign(space.size(), 0.0);
  auto flux = [q](double g, double diff) {
    if (diff == 0.0) return 0.0;
    return std::pow(g, q - 2.0) * diff;
  };

  if (const auto* g = std::get_if<EuclideanGrid>(&space.model())) {
    res.calibrated = true;
    const double h = g->spacing;
    const int dim = g->dim;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto m = space.grid_multi(i);
      bool interior = true;
      for (int d = 0; d < dim; ++d)
        if (m[d] == 0 || m[d] + 1 >= g->counts[d]) interior = false;
      if (!interior) continue;
      // Transverse differences need one more layer on each side.
      auto at = [&](std::array<long long, 3> off) -> double {
        std::array<std::size_t, 3> mm = m;
        for (int d = 0; d < 3; ++d) {
          const long long v = static_cast<long long>(m[d]) + off[d];
          const long long hi = static_cast<long long>(g->counts[d]) - 1;
          mm[d] = static_cast<std::size_t>(std::clamp<long long>(v, 0, hi));
        }
        return phi[space.grid_index(mm)];
      };
      double total = 0.0;
      for (int d = 0; d < dim; ++d)
        for (int sgn : {-1, 1}) {
          std::array<long long, 3> e{0, 0, 0};
          e[d] = sgn;
          const double diff = at(e) - phi[i];
          double g2 = (diff / h) * (diff / h);
          for (int o = 0; o < dim; ++o) {
            if (o == d) continue;
            std::array<long long, 3> up{0, 0, 0}, dn{0, 0, 0}, up2 = e, dn2 = e;
            up[o] = 1;
            dn[o] = -1;
            up2[o] = 1;
            dn2[o] = -1;
            const double tr = ((at(up) - at(dn)) + (at(up2) - at(dn2))) / (4.0 * h);
            g2 += tr * tr;
          }
          total += flux(std::sqrt(g2), diff) / (h * h);
        }
      res.values[i] = total;
    }
    return res;
  }
  if (const auto* c = std::get_if<Circle>(&space.model())) {
    res.calibrated = true;
    const double h = space.spacing();
    const std::size_t n = c->n;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j : {(i + 1) % n, (i + n - 1) % n}) {
        const double diff = phi[j] - phi[i];
        total += flux(std::abs(diff) / h, diff) / (h * h);
      }
      res.values[i] = total;
    }
    return res;
  }
  if (const auto* gr = std::get_if<WeightedGraph>(&space.model())) {
    for (const auto& e : gr->edges) {
      const double diff = phi[e.v] - phi[e.u];
      const double v = e.weight * flux(std::abs(diff) / e.length, diff) / (e.length * e.length);
      res.values[e.u] += v;
      res.values[e.v] -= v;
    }
    return res;
  }
  throw Error("UncalibratedGraph", "space has no graph structure for a Laplacian");
}

}  // namespace wassergeo
