#pragma once

// Transport costs built from the metric: the power cost d^p/p and Orlicz
// costs L(d/lambda), together with the c-transform calculus on finite sets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>

#include "wassergeo/core.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo {

/// A Young function L with its derivative l and the inverses of both.
/// Custom functions may leave the inverses empty; they are then obtained by
/// monotone bisection.
struct OrliczFunction {
  std::string name;
  std::function<double(double)> L;
  std::function<double(double)> l;
  std::function<double(double)> l_inv;
  std::function<double(double)> L_inv;

  double value(double r) const { return L(r); }
  double derivative(double r) const { return l(r); }
  double derivative_inverse(double s) const {
    if (l_inv) return l_inv(s);
    return invert_increasing(l, s);
  }
  double inverse(double u) const {
    if (L_inv) return L_inv(u);
    return invert_increasing(L, u);
  }

  /// L(r) = r^p / p.
  static OrliczFunction power(double p) {
    if (!(p > 1)) throw Error("InvalidCost", "power Orlicz function needs p > 1");
    OrliczFunction f;
    f.name = "power:" + format_param(p);
    f.L = [p](double r) { return std::pow(r, p) / p; };
    f.l = [p](double r) { return std::pow(r, p - 1.0); };
    f.l_inv = [p](double s) { return std::pow(s, 1.0 / (p - 1.0)); };
    f.L_inv = [p](double u) { return std::pow(p * u, 1.0 / p); };
    return f;
  }

  /// L(r) = e^r - 1 - r. The inverse uses the lower Lambert-W branch:
  /// e^r - r = a  <=>  r = -W_{-1}(-e^{-a}) - a.
  static OrliczFunction exp_m1_mr() {
    OrliczFunction f;
    f.name = "exp_m1_mr";
    f.L = [](double r) { return std::expm1(r) - r; };
    f.l = [](double r) { return std::expm1(r); };
    f.l_inv = [](double s) { return std::log1p(s); };
    f.L_inv = [](double u) {
      if (u <= 0) return 0.0;
      double r = 0.0;
      if (u < 1e-6) {
        const double s = std::sqrt(2.0 * u);
        r = s - s * s / 6.0 + s * s * s / 36.0;
      } else if (u < 600.0) {
        const double a = u + 1.0;
        r = -boost::math::lambert_wm1(-std::exp(-a)) - a;
      } else {
        r = std::log(u + std::log(u));  // e^{-a} underflows here
      }
      // Newton polish on e^r - 1 - r = u; W_{-1} is ill-conditioned near the branch point
      for (int k = 0; k < 3; ++k) {
        const double g = std::expm1(r);
        if (g <= 0) break;
        r -= (g - r - u) / g;
      }
      return r;
    };
    return f;
  }

  /// L(r) = cosh(r) - 1.
  static OrliczFunction cosh_m1() {
    OrliczFunction f;
    f.name = "cosh_m1";
    f.L = [](double r) {
      const double h = std::sinh(0.5 * r);
      return 2.0 * h * h;
    };
    f.l = [](double r) { return std::sinh(r); };
    f.l_inv = [](double s) { return std::asinh(s); };
    f.L_inv = [](double u) { return 2.0 * std::asinh(std::sqrt(0.5 * u)); };  // cosh r - 1 = 2 sinh^2(r/2)
    return f;
  }

  /// Phi o L for a convex increasing outer function Phi.
  static OrliczFunction compose(const std::string& phi_name, std::function<double(double)> phi,
                                std::function<double(double)> phi_prime, const OrliczFunction& inner) {
    OrliczFunction f;
    f.name = phi_name + "(" + inner.name + ")";
    f.L = [phi, L = inner.L](double r) { return phi(L(r)); };
    f.l = [phi_prime, L = inner.L, l = inner.l](double r) { return phi_prime(L(r)) * l(r); };
    return f;
  }

  static OrliczFunction by_name(const std::string& name) {
    if (name == "exp_m1_mr") return exp_m1_mr();
    if (name == "cosh_m1") return cosh_m1();
    if (name.rfind("power:", 0) == 0) return power(std::stod(name.substr(6)));
    throw Error("InvalidCost", "unknown Orlicz function '" + name + "'");
  }

  static std::string format_param(double p) {
    std::string s = std::to_string(p);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

struct CostModel {
  enum class Kind { Power, Orlicz };

  Kind kind = Kind::Power;
  double p = 2.0;
  OrliczFunction L;
  double lambda = 1.0;

  static CostModel power(double p) {
    if (!(p > 1)) throw Error("InvalidCost", "power cost needs p > 1");
    CostModel c;
    c.kind = Kind::Power;
    c.p = p;
    return c;
  }

  static CostModel orlicz(OrliczFunction L, double lambda = 1.0) {
    if (!(lambda > 0)) throw Error("InvalidCost", "Orlicz scale must be positive");
    CostModel c;
    c.kind = Kind::Orlicz;
    c.L = std::move(L);
    c.lambda = lambda;
    return c;
  }

  bool is_power() const { return kind == Kind::Power; }

  /// Hoelder conjugate of p.
  double q() const { return p / (p - 1.0); }

  /// Cost as a function of distance: d^p/p or L(d/lambda).
  double operator()(double d) const {
    if (kind == Kind::Power) return std::pow(d, p) / p;
    return L.L(d / lambda);
  }

  CostModel with_lambda(double lam) const {
    CostModel c = *this;
    c.lambda = lam;
    return c;
  }

  /// l_lambda(s) = lambda^{-1} l(s / lambda).
  double scaled_derivative(double s) const { return L.l(s / lambda) / lambda; }
  /// l_lambda^{-1}(t) = lambda l^{-1}(lambda t).
  double scaled_derivative_inverse(double t) const { return lambda * L.derivative_inverse(lambda * t); }

  std::string describe() const {
    if (kind == Kind::Power) return "power:" + OrliczFunction::format_param(p);
    return "orlicz:" + L.name + "@" + OrliczFunction::format_param(lambda);
  }
};

/// Dense cost matrix between two index lists of a space.
class CostMatrix {
public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static CostMatrix build(const MetricMeasureSpace& space, std::span<const std::size_t> X,
                          std::span<const std::size_t> Y, const CostModel& cost) {
    CostMatrix m(X.size(), Y.size());
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t j = 0; j < Y.size(); ++j) m.data_[i * m.cols_ + j] = cost(space.distance(X[i], Y[j]));
    return m;
  }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  /// Row-major storage.
  const double* data() const { return data_.data(); }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// phi^c(y_j) = min_i cost(i, j) - phi(x_i). The minimum runs in increasing
/// i, so the result is bitwise independent of the thread count.
template <class CostFn>
std::vector<double> c_transform(std::span<const double> phi, std::size_t ny, const CostFn& cost,
                                unsigned threads = thread_cap()) {
  if (phi.empty() || ny == 0) throw Error("EmptyDomain", "c-transform over an empty set");
  std::vector<double> out(ny);
  parallel_for(ny, threads, [&](std::size_t j) {
    double best = kInf;
    for (std::size_t i = 0; i < phi.size(); ++i) best = std::min(best, cost(i, j) - phi[i]);
    out[j] = best;
  });
  return out;
}

/// psi^cbar(x_i) = min_j cost(i, j) - psi(y_j).
template <class CostFn>
std::vector<double> cbar_transform(std::span<const double> psi, std::size_t nx, const CostFn& cost,
                                   unsigned threads = thread_cap()) {
  if (psi.empty() || nx == 0) throw Error("EmptyDomain", "c-bar-transform over an empty set");
  std::vector<double> out(nx);
  parallel_for(nx, threads, [&](std::size_t i) {
    double best = kInf;
    for (std::size_t j = 0; j < psi.size(); ++j) best = std::min(best, cost(i, j) - psi[j]);
    out[i] = best;
  });
  return out;
}

/// Real-valued function on a subset of the points of a space. Values outside
/// the domain are -infinity in the extended sense and never enter a minimum.
struct Potential {
  std::vector<std::size_t> domain;
  std::vector<double> values;

  double at(std::size_t local) const { return values[local]; }
  std::size_t size() const { return domain.size(); }
};

inline std::vector<std::size_t> all_points(const MetricMeasureSpace& space) {
  std::vector<std::size_t> idx(space.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

inline Potential c_transform(const MetricMeasureSpace& space, const Potential& phi,
                             std::span<const std::size_t> Y, const CostModel& cost) {
  const auto m = CostMatrix::build(space, phi.domain, Y, cost);
  return {std::vector<std::size_t>(Y.begin(), Y.end()), c_transform(phi.values, Y.size(), m)};
}

inline Potential cbar_transform(const MetricMeasureSpace& space, const Potential& psi,
                                std::span<const std::size_t> X, const CostModel& cost) {
  const auto m = CostMatrix::build(space, X, psi.domain, cost);
  return {std::vector<std::size_t>(X.begin(), X.end()), cbar_transform(psi.values, X.size(), m)};
}

struct ConcavityVerdict {
  bool concave = false;
  double deviation = 0.0;
};

/// phi is c-concave relative to (X, Y) iff it is fixed by the double transform.
template <class CostFn>
ConcavityVerdict is_c_concave(std::span<const double> phi, std::size_t ny, const CostFn& cost, double tol) {
  const auto psi = c_transform(phi, ny, cost);
  const auto back = cbar_transform(std::span<const double>(psi), phi.size(), cost);
  double dev = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) dev = std::max(dev, std::abs(phi[i] - back[i]));
  return {dev <= tol, dev};
}

inline ConcavityVerdict is_c_concave(const MetricMeasureSpace& space, const Potential& phi,
                                     std::span<const std::size_t> Y, const CostModel& cost, double tol) {
  const auto m = CostMatrix::build(space, phi.domain, Y, cost);
  return is_c_concave(std::span<const double>(phi.values), Y.size(), m, tol);
}

/// Indices (into Y) of the c-subdifferential of phi at the local point x.
/// All near-minimizers within tol are returned in increasing order.
template <class CostFn>
std::vector<std::size_t> subdifferential(std::span<const double> phi, std::size_t ny, std::size_t x,
                                         const CostFn& cost, double tol) {
  const auto verdict = is_c_concave(phi, ny, cost, tol);
  if (!verdict.concave) throw Error("NotCConcave", "potential deviates from its double transform by " +
                                                       std::to_string(verdict.deviation));
  const auto psi = c_transform(phi, ny, cost);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < ny; ++j)
    if (std::abs(phi[x] + psi[j] - cost(x, j)) <= tol) out.push_back(j);
  return out;
}

/// Space-level wrapper returning point indices of Y.
inline std::vector<std::size_t> subdifferential(const MetricMeasureSpace& space, const Potential& phi,
                                                std::size_t x_local, std::span<const std::size_t> Y,
                                                const CostModel& cost, double tol) {
  const auto m = CostMatrix::build(space, phi.domain, Y, cost);
  const auto local = subdifferential(std::span<const double>(phi.values), Y.size(), x_local, m, tol);
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (auto j : local) out.push_back(Y[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Star-shapedness of concave potentials

struct StarShapeReport {
  std::vector<double> scaled;  // phi_t on X
  bool verdict = false;
  double deviation = 0.0;
  std::size_t target_count = 0;    // |Y|, the union of subdifferentials
  std::size_t midpoint_count = 0;  // |Z_t(X, Y)|
};

/// Scales a c-concave phi (relative to (X, Y0)) to phi_t = t^{p-1} phi for
/// power costs or t^{-1} phi for Orlicz costs (whose scale becomes t*lambda)
/// and measures its distance from the double transform relative to
/// (X, Z_t(X, Y)), where Y is the union of the subdifferentials of phi.
/// Model spaces use exact t-fraction locations; other spaces use midpoint_set.
inline StarShapeReport star_shape_audit(const MetricMeasureSpace& space, const Potential& phi,
                                        std::span<const std::size_t> Y0, double t, const CostModel& cost,
                                        double tol) {
  if (t < 0 || t > 1) throw Error("InvalidParameter", "t must lie in [0, 1]");
  if (!cost.is_power() && t == 0) throw Error("InvalidParameter", "Orlicz star-shapedness needs t > 0");
  const auto& X = phi.domain;
  StarShapeReport rep;

  const auto m0 = CostMatrix::build(space, X, Y0, cost);
  const auto psi0 = c_transform(std::span<const double>(phi.values), Y0.size(), m0);
  const double sub_tol = 1e-10 * (1.0 + std::abs(*std::max_element(phi.values.begin(), phi.values.end())));
  std::vector<char> in_y(Y0.size(), 0);
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < Y0.size(); ++j)
      if (std::abs(phi.values[i] + psi0[j] - m0(i, j)) <= sub_tol) in_y[j] = 1;
  std::vector<std::size_t> Y;
  for (std::size_t j = 0; j < Y0.size(); ++j)
    if (in_y[j]) Y.push_back(Y0[j]);
  rep.target_count = Y.size();

  CostModel scaled_cost = cost;
  double factor = 1.0;
  if (cost.is_power()) {
    factor = t == 0 ? 0.0 : std::pow(t, cost.p - 1.0);
  } else {
    factor = 1.0 / t;
    scaled_cost = cost.with_lambda(t * cost.lambda);
  }
  rep.scaled.resize(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) rep.scaled[i] = factor * phi.values[i];

  CostMatrix mz;
  if (space.has_coordinates() || space.is_graph()) {
    std::vector<Location> Z;
    Z.reserve(X.size() * Y.size());
    for (auto x : X)
      for (auto y : Y) Z.push_back(space.interpolate(x, y, t));
    mz = CostMatrix(X.size(), Z.size());
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t k = 0; k < Z.size(); ++k) mz.at(i, k) = scaled_cost(space.distance(X[i], Z[k]));
    rep.midpoint_count = Z.size();
  } else {
    std::vector<char> in_z(space.size(), 0);
    for (auto x : X)
      for (auto y : Y)
        for (auto z : midpoint_set(space, x, y, t)) in_z[z] = 1;
    std::vector<std::size_t> Z;
    for (std::size_t z = 0; z < space.size(); ++z)
      if (in_z[z]) Z.push_back(z);
    if (Z.empty()) throw Error("EmptyMidpointSet", "no t-fraction points at this resolution");
    mz = CostMatrix::build(space, X, Z, scaled_cost);
    rep.midpoint_count = Z.size();
  }
  const auto verdict = is_c_concave(std::span<const double>(rep.scaled), mz.cols(), mz, tol);
  rep.verdict = verdict.concave;
  rep.deviation = verdict.deviation;
  return rep;
}

// ---------------------------------------------------------------------------
// Distance inequalities along t-fraction points

/// Residual of the t-fraction distance inequality given the three distances
/// d(m,z), d(x,y), d(m,y). Power costs:
///   d^p(m,z) + t^{p-1}(1-t) d^p(x,y) - t^{p-1} d^p(m,y),
/// Orlicz costs (with scale lambda):
///   L_{t lambda}(d(m,z)) + t^{-1}(1-t) L_lambda(d(x,y)) - t^{-1} L_lambda(d(m,y)).
/// Nonnegative whenever z is an exact t-fraction point of (x, y).
inline double distance_inequality_residual(double dmz, double dxy, double dmy, double t, const CostModel& cost) {
  if (cost.is_power()) {
    const double p = cost.p;
    const double tp = std::pow(t, p - 1.0);
    return std::pow(dmz, p) + tp * (1.0 - t) * std::pow(dxy, p) - tp * std::pow(dmy, p);
  }
  if (!(t > 0)) throw Error("InvalidParameter", "Orlicz distance inequality needs t > 0");
  const double lam = cost.lambda;
  return cost.L.L(dmz / (t * lam)) + (1.0 - t) / t * cost.L.L(dxy / lam) - cost.L.L(dmy / lam) / t;
}

inline double distance_inequality(const MetricMeasureSpace& space, std::size_t m, std::size_t x, std::size_t y,
                                  const Location& z, double t, const CostModel& cost, double tol) {
  const double dxy = space.distance(x, y);
  if (std::abs(space.distance(x, z) - t * dxy) > tol || std::abs(space.distance(y, z) - (1 - t) * dxy) > tol)
    throw Error("NotAMidpoint", "z is not a t-fraction point of (x, y)");
  return distance_inequality_residual(space.distance(m, z), dxy, space.distance(m, y), t, cost);
}

struct InfDistReport {
  bool verdict = false;
  std::size_t argmin = 0;
  double value_at_x = 0.0;
  double minimum = 0.0;
};

/// h(m) = f_t(m) - s(t) f_1(m) with f_t(m) = cost_t(m, eta_t), where
/// s(t) = t^{p-1} (power) or t^{-1} (Orlicz, cost_t at scale t*lambda).
/// The minimum of h over the whole space must sit at x. With f_t = -cost_t
/// the distance inequality puts a maximum at x instead.
inline InfDistReport inf_dist_min_audit(const MetricMeasureSpace& space, std::size_t x, std::size_t y, double t,
                                        const CostModel& cost, double tol) {
  if (!(t > 0) || t > 1) throw Error("InvalidParameter", "t must lie in (0, 1]");
  const Location eta_t = space.interpolate(x, y, t);
  const Location eta_1 = space.locate(y);
  CostModel cost_t = cost;
  double s = 0.0;
  if (cost.is_power()) {
    s = std::pow(t, cost.p - 1.0);
  } else {
    s = 1.0 / t;
    cost_t = cost.with_lambda(t * cost.lambda);
  }
  InfDistReport rep;
  rep.minimum = kInf;
  for (std::size_t m = 0; m < space.size(); ++m) {
    const double h = cost_t(space.distance(m, eta_t)) - s * cost(space.distance(m, eta_1));
    if (m == x) rep.value_at_x = h;
    if (h < rep.minimum) {
      rep.minimum = h;
      rep.argmin = m;
    }
  }
  rep.verdict = rep.value_at_x <= rep.minimum + tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Busemann functions

struct BusemannReport {
  std::vector<double> b;           // b_T on all points
  std::vector<std::size_t> window; // audited points
  double deviation = 0.0;          // sup over window |b^{c cbar} - b|
  double stabilization = 0.0;      // sup over window |b_T - b_{T/2}|
  bool monotone = true;            // T -> b_T(x) non-increasing on sampled horizons
  double horizon = 0.0;
};

/// Default audit window: points farther than diam/5 from the boundary of a
/// truncated 1D line.
inline std::vector<std::size_t> busemann_default_window(const MetricMeasureSpace& space) {
  std::vector<std::size_t> w;
  const double margin = space.diameter() / 5.0;
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < space.size(); ++i) {
    lo = std::min(lo, space.coord(i)[0]);
    hi = std::max(hi, space.coord(i)[0]);
  }
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space.coord(i)[0] >= lo + margin && space.coord(i)[0] <= hi - margin) w.push_back(i);
  return w;
}

/// Busemann approximation b_T(x) = d(x, ray(T)) - T and its concavity defect
/// over the window. The ray is any map from arc length to a location.
/// `horizons` must be increasing and end with T; the last two are used for
/// the stabilization check.
inline BusemannReport busemann_audit(const MetricMeasureSpace& space, const std::function<Location(double)>& ray,
                                     std::span<const double> horizons, std::span<const std::size_t> window,
                                     const CostModel& cost, double tol) {
  if (horizons.empty()) throw Error("InvalidParameter", "need at least one horizon");
  const std::size_t n = space.size();
  BusemannReport rep;
  rep.horizon = horizons.back();
  rep.window.assign(window.begin(), window.end());

  std::vector<std::vector<double>> bt(horizons.size(), std::vector<double>(n));
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    const Location g = ray(horizons[k]);
    for (std::size_t i = 0; i < n; ++i) bt[k][i] = space.distance(i, g) - horizons[k];
  }
  for (std::size_t k = 1; k < horizons.size(); ++k)
    for (auto i : window)
      if (bt[k][i] > bt[k - 1][i] + 1e-12) rep.monotone = false;
  rep.b = bt.back();
  if (horizons.size() >= 2) {
    const auto& prev = bt[bt.size() - 2];
    for (auto i : window) rep.stabilization = std::max(rep.stabilization, std::abs(rep.b[i] - prev[i]));
    if (rep.stabilization > tol)
      throw Error("HorizonTooShort", "b_T has not stabilized on the audit window");
  }

  // Uniform 1D grids: the cost depends on |i - j| only.
  std::vector<double> table;
  const bool toeplitz = space.is_grid() && std::get<EuclideanGrid>(space.model()).dim == 1;
  if (toeplitz) {
    table.resize(n);
    for (std::size_t k = 0; k < n; ++k) table[k] = cost(space.distance(0, k));
  }
  auto c = [&](std::size_t i, std::size_t j) {
    if (toeplitz) return table[i > j ? i - j : j - i];
    return cost(space.distance(i, j));
  };
  std::vector<double> bc(n);
  parallel_for(n, thread_cap(), [&](std::size_t j) {
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, c(i, j) - rep.b[i]);
    bc[j] = best;
  });
  for (auto i : window) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) best = std::min(best, c(i, j) - bc[j]);
    rep.deviation = std::max(rep.deviation, std::abs(best - rep.b[i]));
  }
  return rep;
}

}  // namespace wassergeo
