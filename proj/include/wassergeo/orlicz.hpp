#pragma once

// Orlicz-Wasserstein distance w_L by bisection on the scale lambda,
// comparison under convex outer functions, and the potential rescaling
// along Orlicz geodesics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wassergeo/core.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/interpolation.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo {

struct BisectionStep {
  double lambda = 0.0;
  double g = 0.0;
};

struct OrliczDistanceResult {
  double lambda_star = 0.0;
  double g = 0.0;  // normalized cost at lambda_star
  OTSolution solution;
  std::vector<BisectionStep> trace;
  std::size_t iterations = 0;
};

/// Transport problem with a fixed pair of supports; only the cost changes
/// from one lambda to the next.
class ScaledTransport {
public:
  ScaledTransport(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1)
      : X_(mu0.support()), Y_(mu1.support()) {
    for (auto x : X_) a_.push_back(mu0.mass[x]);
    for (auto y : Y_) b_.push_back(mu1.mass[y]);
    dist_ = CostMatrix(X_.size(), Y_.size());
    for (std::size_t i = 0; i < X_.size(); ++i)
      for (std::size_t j = 0; j < Y_.size(); ++j) {
        const double d = space.distance(X_[i], Y_[j]);
        dist_.at(i, j) = d;
        d_max_ = std::max(d_max_, d);
      }
  }

  double d_max() const { return d_max_; }

  /// min over couplings of sum cost(d) pi.
  TransportResult solve(const CostModel& cost) const {
    CostMatrix c(X_.size(), Y_.size());
    for (std::size_t i = 0; i < X_.size(); ++i)
      for (std::size_t j = 0; j < Y_.size(); ++j) c.at(i, j) = cost(dist_(i, j));
    auto tr = transport_simplex(a_, b_, c);
    last_cost_ = std::move(c);
    return tr;
  }

  double value(const TransportResult& tr) const {
    double v = 0.0;
    for (auto [i, j, m] : tr.flows) v += m * last_cost_(i, j);
    return v;
  }

private:
  std::vector<std::size_t> X_, Y_;
  std::vector<double> a_, b_;
  CostMatrix dist_;
  double d_max_ = 0.0;
  mutable CostMatrix last_cost_;
};

/// w_L(mu0, mu1) = inf{lambda > 0 : min_pi int L(d/lambda) dpi <= 1}.
/// Bisection stops on bracket width <= tol (1 + lambda).
inline OrliczDistanceResult orlicz_distance(const MetricMeasureSpace& space, const DiscreteMeasure& mu0,
                                            const DiscreteMeasure& mu1, const OrliczFunction& L,
                                            double tol = 1e-8) {
  validate_measure(space, mu0);
  validate_measure(space, mu1);
  OrliczDistanceResult res;
  if (mu0.mass == mu1.mass) {
    res.lambda_star = 0.0;
    res.g = 0.0;
    res.solution = solve(space, mu0, mu1, CostModel::orlicz(L, 1.0));
    return res;
  }
  ScaledTransport problem(space, mu0, mu1);
  auto g = [&](double lam) {
    const auto tr = problem.solve(CostModel::orlicz(L, lam));
    const double v = problem.value(tr);
    res.trace.push_back({lam, v});
    ++res.iterations;
    return v;
  };

  // L(d_max / hi) = 1 bounds every coupling cost by 1.
  double hi = problem.d_max() / L.inverse(1.0);
  double g_hi = g(hi);
  while (g_hi > 1.0) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error("NoFiniteDistance", "normalized cost stays above 1");
    g_hi = g(hi);
  }
  double lo = 0.5 * hi;
  while (g(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) throw Error("NoFiniteDistance", "lower bracket collapsed");
  }
  while (hi - lo > tol * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  res.lambda_star = hi;
  res.solution = solve(space, mu0, mu1, CostModel::orlicz(L, hi));
  res.g = res.solution.primal;
  return res;
}

/// True if g is non-increasing in lambda along the evaluated trace.
inline bool trace_monotone(const std::vector<BisectionStep>& trace) {
  auto sorted = trace;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k].g > sorted[k - 1].g) return false;
  return true;
}

/// Convex increasing outer function with Phi(1) = 1.
struct OuterFunction {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;

  static OuterFunction square() {
    return {"square", [](double r) { return r * r; }, [](double r) { return 2.0 * r; }};
  }
  static OuterFunction exp_shift() {
    return {"exp_shift", [](double r) { return std::exp(r - 1.0); }, [](double r) { return std::exp(r - 1.0); }};
  }
  static OuterFunction identity() {
    return {"identity", [](double r) { return r; }, [](double) { return 1.0; }};
  }
  static OuterFunction by_name(const std::string& name) {
    if (name == "square") return square();
    if (name == "exp_shift") return exp_shift();
    if (name == "identity") return identity();
    throw Error("InvalidPhi", "unknown outer function '" + name + "'");
  }
};

struct JensenReport {
  double w_L = 0.0;
  double w_phi_L = 0.0;
  bool verdict = false;
};

inline JensenReport jensen_monotonicity_check(const MetricMeasureSpace& space, const DiscreteMeasure& mu0,
                                              const DiscreteMeasure& mu1, const OrliczFunction& L,
                                              const OuterFunction& phi, double tol = 1e-8,
                                              double lambda_tol = 1e-10) {
  if (std::abs(phi.phi(1.0) - 1.0) > 1e-12) throw Error("InvalidPhi", "outer function must satisfy Phi(1) = 1");
  JensenReport rep;
  rep.w_L = orlicz_distance(space, mu0, mu1, L, lambda_tol).lambda_star;
  const auto composed = OrliczFunction::compose(phi.name, phi.phi, phi.phi_prime, L);
  rep.w_phi_L = orlicz_distance(space, mu0, mu1, composed, lambda_tol).lambda_star;
  rep.verdict = rep.w_L <= rep.w_phi_L + tol;
  return rep;
}

/// Displacement interpolation along the optimal plan at scale lambda_star.
inline DynamicPlan orlicz_geodesic(const MetricMeasureSpace& space, const DiscreteMeasure& mu0,
                                   const DiscreteMeasure& mu1, const OrliczFunction& L, double tol = 1e-8) {
  const auto res = orlicz_distance(space, mu0, mu1, L, tol);
  DynamicPlan plan = build_plan(res.solution, CostModel::orlicz(L, res.lambda_star > 0 ? res.lambda_star : 1.0));
  plan.lambda_star = res.lambda_star;
  return plan;
}

struct PotentialScalingReport {
  double deviation = 0.0;
  double lambda_star = 0.0;
  std::vector<double> phi;    // on supp mu0
  std::vector<double> phi_t;  // on supp mu0
};

/// Compares the anchored Kantorovich potential of (mu0, mu_t) at scale
/// t*lambda_star with t^{-1} times that of (mu0, mu1) at lambda_star.
inline PotentialScalingReport interpolation_potential_check(const MetricMeasureSpace& space,
                                                            const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                                            const OrliczFunction& L, double t,
                                                            double tol = 1e-10,
                                                            Deposit mode = Deposit::Nearest) {
  if (!(t > 0) || t > 1) throw Error("InvalidParameter", "t must lie in (0, 1]");
  PotentialScalingReport rep;
  const auto res = orlicz_distance(space, mu0, mu1, L, tol);
  rep.lambda_star = res.lambda_star;
  if (res.lambda_star == 0.0) return rep;
  DynamicPlan plan = build_plan(res.solution, CostModel::orlicz(L, res.lambda_star));
  const auto mu_t = displace(space, plan, t, mode).measure;
  const auto sol_t = solve(space, mu0, mu_t, CostModel::orlicz(L, t * res.lambda_star));
  rep.phi = res.solution.phi.values;
  rep.phi_t = sol_t.phi.values;
  for (std::size_t i = 0; i < rep.phi.size(); ++i)
    rep.deviation = std::max(rep.deviation, std::abs(rep.phi_t[i] - rep.phi[i] / t));
  return rep;
}

}  // namespace wassergeo
