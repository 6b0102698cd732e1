#pragma once

// Displacement interpolation along optimal plans: t-slices of a plan,
// geodesic-property and non-crossing checks, densities.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "wassergeo/core.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo {

struct PlanAtom {
  std::size_t x = 0;
  std::size_t y = 0;
  double mass = 0.0;
};

/// Coupling atoms joined by the geodesics of the space. Paths are evaluated
/// on demand through MetricMeasureSpace::interpolate.
struct DynamicPlan {
  std::vector<PlanAtom> atoms;
  CostModel cost;
  double lambda_star = 0.0;  // Orlicz plans only

  GeodesicPath path(const MetricMeasureSpace& space, std::size_t atom, std::size_t samples) const {
    return geodesic(space, atoms[atom].x, atoms[atom].y, samples);
  }
};

inline DynamicPlan build_plan(const OTSolution& sol, const CostModel& cost) {
  DynamicPlan plan;
  plan.cost = cost;
  for (const auto& e : sol.coupling.entries) plan.atoms.push_back({e.x, e.y, e.mass});
  return plan;
}

/// How off-grid mass is put back on the point set.
enum class Deposit {
  Nearest,  // whole atom to the nearest point
  Linear,   // split between neighboring points (multilinear on grids)
};

struct DisplacedMeasure {
  DiscreteMeasure measure;
  double max_snap = 0.0;
};

namespace detail {

inline void deposit_linear(const MetricMeasureSpace& space, const Location& loc, double mass,
                           std::vector<double>& out) {
  if (const auto* g = std::get_if<EuclideanGrid>(&space.model())) {
    std::array<std::size_t, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int d = 0; d < g->dim; ++d) {
      const double r = (loc.coord[d] - g->origin[d]) / g->spacing;
      const double hi = static_cast<double>(g->counts[d] - 1);
      double fl = std::floor(r);
      if (std::abs(r - std::round(r)) < 1e-9) fl = std::round(r);
      fl = std::clamp(fl, 0.0, hi);
      base[d] = static_cast<std::size_t>(fl);
      frac[d] = std::clamp(r - fl, 0.0, 1.0);
      if (base[d] + 1 > g->counts[d] - 1) frac[d] = 0.0;
      if (frac[d] < 1e-9) frac[d] = 0.0;
    }
    const int corners = 1 << g->dim;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      auto m = base;
      for (int d = 0; d < g->dim; ++d) {
        if (c & (1 << d)) {
          w *= frac[d];
          m[d] += 1;
        } else {
          w *= 1.0 - frac[d];
        }
      }
      if (w > 0) out[space.grid_index(m)] += w * mass;
    }
    return;
  }
  if (const auto* c = std::get_if<Circle>(&space.model())) {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(c->n);
    double r = loc.coord[0] / step;
    double fl = std::floor(r);
    if (std::abs(r - std::round(r)) < 1e-9) fl = std::round(r);
    double f = std::clamp(r - fl, 0.0, 1.0);
    if (f < 1e-9) f = 0.0;
    const long long nn = static_cast<long long>(c->n);
    const long long k = ((static_cast<long long>(fl) % nn) + nn) % nn;
    out[static_cast<std::size_t>(k)] += (1.0 - f) * mass;
    if (f > 0) out[static_cast<std::size_t>((k + 1) % nn)] += f * mass;
    return;
  }
  if (loc.edge_to == npos) {
    out[loc.anchor] += mass;
    return;
  }
  const double w = space.distance(loc.anchor, loc.edge_to);
  const double f = loc.offset / w;
  out[loc.anchor] += (1.0 - f) * mass;
  out[loc.edge_to] += f * mass;
}

}  // namespace detail

/// (e_t)_* of the plan, deposited on the point set.
inline DisplacedMeasure displace(const MetricMeasureSpace& space, const DynamicPlan& plan, double t,
                                 Deposit mode = Deposit::Nearest) {
  if (t < 0 || t > 1) throw Error("InvalidParameter", "t must lie in [0, 1]");
  DisplacedMeasure out;
  out.measure.mass.assign(space.size(), 0.0);
  for (const auto& a : plan.atoms) {
    if (t == 0.0) {
      out.measure.mass[a.x] += a.mass;
      continue;
    }
    if (t == 1.0) {
      out.measure.mass[a.y] += a.mass;
      continue;
    }
    const Location loc = space.interpolate(a.x, a.y, t);
    const auto [idx, snap] = space.snap(loc);
    out.max_snap = std::max(out.max_snap, snap);
    if (mode == Deposit::Nearest) {
      out.measure.mass[idx] += a.mass;
    } else {
      detail::deposit_linear(space, loc, a.mass, out.measure.mass);
    }
  }
  return out;
}

using MeasureDistance = std::function<double(const DiscreteMeasure&, const DiscreteMeasure&)>;

struct GeodesicCheck {
  double deviation = 0.0;
  double max_snap = 0.0;
  double total = 0.0;  // w(mu_0, mu_1)
  std::vector<std::array<double, 3>> table;  // (s, t, w(mu_s, mu_t))
};

/// max over sampled (s, t) of |w(mu_s, mu_t) - |s - t| w(mu_0, mu_1)|.
inline GeodesicCheck check_plan_geodesic(const MetricMeasureSpace& space, const DynamicPlan& plan,
                                         const MeasureDistance& dist, std::span<const double> ts) {
  GeodesicCheck rep;
  std::vector<DiscreteMeasure> slices;
  for (double t : ts) {
    auto d = displace(space, plan, t);
    rep.max_snap = std::max(rep.max_snap, d.max_snap);
    slices.push_back(std::move(d.measure));
  }
  rep.total = dist(displace(space, plan, 0.0).measure, displace(space, plan, 1.0).measure);
  for (std::size_t a = 0; a < ts.size(); ++a)
    for (std::size_t b = a + 1; b < ts.size(); ++b) {
      const double w = dist(slices[a], slices[b]);
      rep.table.push_back({ts[a], ts[b], w});
      rep.deviation = std::max(rep.deviation, std::abs(w - std::abs(ts[b] - ts[a]) * rep.total));
    }
  return rep;
}

struct Collision {
  std::size_t first = 0;
  std::size_t second = 0;
  double t = 0.0;
  double gap = 0.0;
};

struct CrossingReport {
  std::size_t count = 0;
  std::vector<Collision> witnesses;
};

/// Pairs of atoms with different endpoint pairs whose t-positions coincide
/// within tol at some sampled interior time.
inline CrossingReport check_no_crossing(const MetricMeasureSpace& space, const DynamicPlan& plan,
                                        std::span<const double> interior_ts, double tol) {
  CrossingReport rep;
  const std::size_t n = plan.atoms.size();
  std::vector<Location> pos(n);
  for (double t : interior_ts) {
    if (!(t > 0 && t < 1)) throw Error("InvalidParameter", "interior times must lie in (0, 1)");
    for (std::size_t k = 0; k < n; ++k) pos[k] = space.interpolate(plan.atoms[k].x, plan.atoms[k].y, t);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto& A = plan.atoms[a];
        const auto& B = plan.atoms[b];
        if (A.x == B.x && A.y == B.y) continue;
        const double gap = space.distance(pos[a], pos[b]);
        if (gap <= tol) {
          ++rep.count;
          if (rep.witnesses.size() < 16) rep.witnesses.push_back({a, b, t, gap});
        }
      }
  }
  return rep;
}

inline double default_collision_tol(const MetricMeasureSpace& space) {
  return space.has_coordinates() ? 1e-9 : 0.25 * space.spacing();
}

struct Density {
  std::vector<double> rho;
  double singular = 0.0;
};

/// Lebesgue decomposition against the reference weights.
inline Density density(const MetricMeasureSpace& space, const DiscreteMeasure& nu) {
  Density d;
  d.rho.assign(space.size(), 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.weight(i) > 0)
      d.rho[i] = nu.mass[i] / space.weight(i);
    else
      d.singular += nu.mass[i];
  }
  return d;
}

}  // namespace wassergeo
