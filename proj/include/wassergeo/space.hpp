#pragma once

// Finite metric measure spaces: raw distance matrices, weighted graphs and
// two closed-form model spaces (Euclidean grids and circles). Model spaces
// also expose off-grid locations so geodesics and t-fraction points can be
// evaluated exactly before they are snapped back to the point set.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wassergeo/core.hpp"

namespace wassergeo {

using Coord = std::array<double, 3>;

struct EuclideanGrid {
  int dim = 1;
  double spacing = 1.0;
  std::array<std::size_t, 3> counts{1, 1, 1};
  Coord origin{0.0, 0.0, 0.0};
};

struct Circle {
  double radius = 1.0;
  std::size_t n = 0;
};

struct GraphEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 1.0;
  double weight = 1.0;  // conductance used by graph Laplacians
};

struct WeightedGraph {
  std::vector<GraphEdge> edges;
};

struct RawMetric {};

using Model = std::variant<RawMetric, EuclideanGrid, Circle, WeightedGraph>;

/// A point of the underlying continuum: a model coordinate, a position on a
/// graph edge, or simply a point of the finite set.
struct Location {
  std::size_t anchor = 0;   // point index (graph: edge start)
  Coord coord{};            // model coordinates (grid: position, circle: angle)
  std::size_t edge_to = npos;
  double offset = 0.0;      // graph: arc length from anchor towards edge_to
};

struct GeodesicPath {
  std::size_t from = 0;
  std::size_t to = 0;
  double length = 0.0;
  std::vector<double> ts;
  std::vector<Location> locations;
  std::vector<std::size_t> nearest;
  std::vector<double> snap;
};

struct SlopeField {
  std::vector<double> abs;    // |Df|
  std::vector<double> plus;   // |D+f|, ascending slope
  std::vector<double> minus;  // |D-f|, descending slope
  double radius = 0.0;
};

class MetricMeasureSpace {
public:
  /// Explicit distance matrix; validates the metric axioms exhaustively.
  static MetricMeasureSpace from_matrix(std::vector<std::vector<double>> dist,
                                        std::vector<double> weights) {
    MetricMeasureSpace s;
    const std::size_t n = dist.size();
    if (n == 0) throw Error("EmptySpace", "no points");
    s.n_ = n;
    s.dense_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i].size() != n) throw Error("MalformedSpace", "distance matrix is not square");
      for (std::size_t j = 0; j < n; ++j) s.dense_[i * n + j] = dist[i][j];
    }
    s.weights_ = std::move(weights);
    s.model_ = RawMetric{};
    s.validate_weights();
    s.validate_metric();
    return s;
  }

  /// Regular grid in dimension 1..3 with spacing h; default weights h^dim.
  static MetricMeasureSpace euclidean_grid(int dim, std::array<std::size_t, 3> counts, double h,
                                           Coord origin = {0, 0, 0},
                                           std::vector<double> weights = {}) {
    if (dim < 1 || dim > 3) throw Error("MalformedSpace", "grid dimension must be 1..3");
    if (!(h > 0)) throw Error("MalformedSpace", "grid spacing must be positive");
    MetricMeasureSpace s;
    EuclideanGrid g;
    g.dim = dim;
    g.spacing = h;
    g.origin = origin;
    std::size_t n = 1;
    for (int d = 0; d < 3; ++d) {
      g.counts[d] = d < dim ? counts[d] : 1;
      if (g.counts[d] == 0) throw Error("MalformedSpace", "grid count must be positive");
      n *= g.counts[d];
    }
    s.n_ = n;
    s.model_ = g;
    s.coords_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.coords_[i] = s.grid_coord(g, s.grid_multi(g, i));
    if (weights.empty()) weights.assign(n, std::pow(h, dim));
    s.weights_ = std::move(weights);
    s.validate_weights();
    return s;
  }

  /// Convenience: 1D grid with `count` points covering [a, b].
  static MetricMeasureSpace interval(double a, double b, std::size_t count) {
    if (count < 2) throw Error("MalformedSpace", "interval needs at least two points");
    return euclidean_grid(1, {count, 1, 1}, (b - a) / static_cast<double>(count - 1), {a, 0, 0});
  }

  /// n equally spaced points on a circle; default weights are arc lengths.
  static MetricMeasureSpace circle(double radius, std::size_t n, std::vector<double> weights = {}) {
    if (n < 2 || !(radius > 0)) throw Error("MalformedSpace", "circle needs n >= 2 and radius > 0");
    MetricMeasureSpace s;
    s.n_ = n;
    s.model_ = Circle{radius, n};
    s.coords_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      s.coords_[i] = {2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n), 0, 0};
    if (weights.empty()) weights.assign(n, 2.0 * std::numbers::pi * radius / static_cast<double>(n));
    s.weights_ = std::move(weights);
    s.validate_weights();
    return s;
  }

  /// Weighted graph with shortest-path metric.
  static MetricMeasureSpace graph(std::size_t n, std::vector<GraphEdge> edges,
                                  std::vector<double> weights = {}) {
    if (n == 0) throw Error("EmptySpace", "no points");
    MetricMeasureSpace s;
    s.n_ = n;
    s.dense_.assign(n * n, kInf);
    s.next_.assign(n * n, npos);
    for (std::size_t i = 0; i < n; ++i) {
      s.dense_[i * n + i] = 0.0;
      s.next_[i * n + i] = i;
    }
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) throw Error("MalformedSpace", "edge endpoint out of range");
      if (!(e.length > 0)) throw Error("MalformedSpace", "edge length must be positive");
      if (e.length < s.dense_[e.u * n + e.v]) {
        s.dense_[e.u * n + e.v] = s.dense_[e.v * n + e.u] = e.length;
        s.next_[e.u * n + e.v] = e.v;
        s.next_[e.v * n + e.u] = e.u;
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const double dik = s.dense_[i * n + k];
        if (dik == kInf) continue;
        for (std::size_t j = 0; j < n; ++j) {
          const double cand = dik + s.dense_[k * n + j];
          if (cand < s.dense_[i * n + j]) {
            s.dense_[i * n + j] = cand;
            s.next_[i * n + j] = s.next_[i * n + k];
          }
        }
      }
    if (weights.empty()) weights.assign(n, 1.0 / static_cast<double>(n));
    s.weights_ = std::move(weights);
    s.model_ = WeightedGraph{std::move(edges)};
    s.validate_weights();
    return s;
  }

  std::size_t size() const { return n_; }
  const Model& model() const { return model_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const Coord& coord(std::size_t i) const { return coords_[i]; }

  bool is_grid() const { return std::holds_alternative<EuclideanGrid>(model_); }
  bool is_circle() const { return std::holds_alternative<Circle>(model_); }
  bool is_graph() const { return std::holds_alternative<WeightedGraph>(model_); }
  /// Closed-form model spaces carry exact coordinates.
  bool has_coordinates() const { return is_grid() || is_circle(); }
  /// Grids and circles are non-branching; graphs and raw matrices may branch.
  bool non_branching() const { return has_coordinates(); }

  double distance(std::size_t i, std::size_t j) const {
    if (has_coordinates()) return distance(coords_[i], coords_[j]);
    return dense_[i * n_ + j];
  }

  /// Closed-form distance between model coordinates.
  double distance(const Coord& a, const Coord& b) const {
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) {
      double s = 0.0;
      for (int d = 0; d < g->dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
      return std::sqrt(s);
    }
    if (const auto* c = std::get_if<Circle>(&model_)) {
      const double two_pi = 2.0 * std::numbers::pi;
      double diff = std::fmod(std::abs(a[0] - b[0]), two_pi);
      return c->radius * std::min(diff, two_pi - diff);
    }
    throw Error("NoCoordinates", "space has no closed-form coordinates");
  }

  double distance(const Location& a, const Location& b) const {
    if (has_coordinates()) return distance(a.coord, b.coord);
    if (b.edge_to == npos) return distance(b.anchor, a);
    if (a.edge_to == npos) return distance(a.anchor, b);
    // both on graph edges
    const double wa = dense_[a.anchor * n_ + a.edge_to];
    const double wb = dense_[b.anchor * n_ + b.edge_to];
    if ((a.anchor == b.anchor && a.edge_to == b.edge_to))
      return std::abs(a.offset - b.offset);
    if (a.anchor == b.edge_to && a.edge_to == b.anchor)
      return std::abs(a.offset - (wb - b.offset));
    return std::min(a.offset + distance(a.anchor, b), (wa - a.offset) + distance(a.edge_to, b));
  }

  /// Distance from a point of the set to a continuum location.
  double distance(std::size_t i, const Location& loc) const {
    if (has_coordinates()) return distance(coords_[i], loc.coord);
    if (loc.edge_to == npos) return distance(i, loc.anchor);
    const double w = dense_[loc.anchor * n_ + loc.edge_to];
    return std::min(distance(i, loc.anchor) + loc.offset,
                    distance(i, loc.edge_to) + (w - loc.offset));
  }

  Location locate(std::size_t i) const {
    Location loc;
    loc.anchor = i;
    if (has_coordinates()) loc.coord = coords_[i];
    return loc;
  }

  /// The point at fraction t along the chosen geodesic from i to j. Circles
  /// take the minor arc (counter-clockwise for antipodal pairs); graphs follow
  /// the stored shortest path.
  Location interpolate(std::size_t i, std::size_t j, double t) const {
    if (i == j || t <= 0.0) return locate(i);
    if (t >= 1.0) return locate(j);
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) {
      Location loc;
      for (int d = 0; d < g->dim; ++d)
        loc.coord[d] = coords_[i][d] + t * (coords_[j][d] - coords_[i][d]);
      loc.anchor = snap(loc).first;
      return loc;
    }
    if (is_circle()) {
      Location loc;
      loc.coord[0] = coords_[i][0] + t * circle_delta(i, j);
      loc.anchor = snap(loc).first;
      return loc;
    }
    const double total = distance(i, j);
    if (total == kInf) throw Error("Disconnected", "no path between points");
    const double target = t * total;
    std::size_t u = i;
    double walked = 0.0;
    while (u != j) {
      const std::size_t v = next_[u * n_ + j];
      const double w = dense_[u * n_ + v];
      if (walked + w >= target) {
        Location loc;
        loc.anchor = u;
        loc.edge_to = v;
        loc.offset = std::clamp(target - walked, 0.0, w);
        if (loc.offset == 0.0) loc.edge_to = npos;
        return loc;
      }
      walked += w;
      u = v;
    }
    return locate(j);
  }

  /// Nearest point of the set and the snap distance.
  std::pair<std::size_t, double> snap(const Location& loc) const {
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) {
      std::array<std::size_t, 3> m{0, 0, 0};
      for (int d = 0; d < g->dim; ++d) {
        const double r = std::round((loc.coord[d] - g->origin[d]) / g->spacing);
        const double hi = static_cast<double>(g->counts[d] - 1);
        m[d] = static_cast<std::size_t>(std::clamp(r, 0.0, hi));
      }
      const std::size_t idx = grid_index(*g, m);
      return {idx, distance(coords_[idx], loc.coord)};
    }
    if (const auto* c = std::get_if<Circle>(&model_)) {
      const double step = 2.0 * std::numbers::pi / static_cast<double>(c->n);
      long long k = std::llround(loc.coord[0] / step);
      const long long nn = static_cast<long long>(c->n);
      k = ((k % nn) + nn) % nn;
      const auto idx = static_cast<std::size_t>(k);
      return {idx, distance(coords_[idx], loc.coord)};
    }
    if (loc.edge_to == npos) return {loc.anchor, 0.0};
    const double w = dense_[loc.anchor * n_ + loc.edge_to];
    if (loc.offset <= w - loc.offset) return {loc.anchor, loc.offset};
    return {loc.edge_to, w - loc.offset};
  }

  /// Typical point spacing: grid step, circle arc step, or the shortest
  /// nonzero distance for graphs and raw matrices.
  double spacing() const {
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) return g->spacing;
    if (const auto* c = std::get_if<Circle>(&model_))
      return 2.0 * std::numbers::pi * c->radius / static_cast<double>(c->n);
    double m = kInf;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) m = std::min(m, dense_[i * n_ + j]);
    return m;
  }

  double diameter() const {
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) {
      double s = 0;
      for (int d = 0; d < g->dim; ++d) {
        const double len = g->spacing * static_cast<double>(g->counts[d] - 1);
        s += len * len;
      }
      return std::sqrt(s);
    }
    if (const auto* c = std::get_if<Circle>(&model_)) {
      const double step = 2.0 * std::numbers::pi / static_cast<double>(c->n);
      return c->radius * step * std::floor(static_cast<double>(c->n) / 2.0);
    }
    double m = 0;
    for (double d : dense_)
      if (d != kInf) m = std::max(m, d);
    return m;
  }

  /// Default tolerance for t-fraction point sets: half a grid step on grids,
  /// round-off level elsewhere.
  double default_midpoint_tol() const {
    if (is_grid()) return 0.5 * spacing();
    return 1e-12 * std::max(1.0, diameter());
  }

  /// All points j != i with d(i, j) <= radius, in increasing index order.
  std::vector<std::size_t> neighbors(std::size_t i, double radius) const {
    std::vector<std::size_t> out;
    if (const auto* g = std::get_if<EuclideanGrid>(&model_)) {
      const auto reach = static_cast<long long>(std::floor(radius / g->spacing + 1e-9));
      const auto m = grid_multi(*g, i);
      std::array<long long, 3> lo{0, 0, 0}, hi{0, 0, 0};
      for (int d = 0; d < 3; ++d) {
        if (d < g->dim) {
          lo[d] = std::max<long long>(0, static_cast<long long>(m[d]) - reach);
          hi[d] = std::min<long long>(static_cast<long long>(g->counts[d]) - 1,
                                      static_cast<long long>(m[d]) + reach);
        }
      }
      const double slack = 1e-12 * std::max(1.0, radius);
      for (long long c = lo[2]; c <= hi[2]; ++c)
        for (long long b = lo[1]; b <= hi[1]; ++b)
          for (long long a = lo[0]; a <= hi[0]; ++a) {
            const std::size_t j = grid_index(*g, {static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                                                  static_cast<std::size_t>(c)});
            if (j != i && distance(i, j) <= radius + slack) out.push_back(j);
          }
      return out;
    }
    for (std::size_t j = 0; j < n_; ++j)
      if (j != i && distance(i, j) <= radius * (1 + 1e-12)) out.push_back(j);
    return out;
  }

  /// Shortest-path successor of u towards v (graphs only).
  std::size_t next_hop(std::size_t u, std::size_t v) const { return next_[u * n_ + v]; }

  /// Grid multi-index of point i.
  std::array<std::size_t, 3> grid_multi(std::size_t i) const {
    return grid_multi(std::get<EuclideanGrid>(model_), i);
  }
  std::size_t grid_index(std::array<std::size_t, 3> m) const {
    return grid_index(std::get<EuclideanGrid>(model_), m);
  }

  /// Signed angle of the chosen circle geodesic from i to j, in (-pi, pi].
  double circle_delta(std::size_t i, std::size_t j) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double delta = std::fmod(coords_[j][0] - coords_[i][0], two_pi);
    if (delta > std::numbers::pi) delta -= two_pi;
    if (delta <= -std::numbers::pi) delta += two_pi;
    if (std::abs(std::abs(delta) - std::numbers::pi) < 1e-12) delta = std::numbers::pi;
    return delta;
  }

private:
  MetricMeasureSpace() = default;

  static std::array<std::size_t, 3> grid_multi(const EuclideanGrid& g, std::size_t i) {
    return {i % g.counts[0], (i / g.counts[0]) % g.counts[1], i / (g.counts[0] * g.counts[1])};
  }
  static std::size_t grid_index(const EuclideanGrid& g, std::array<std::size_t, 3> m) {
    return m[0] + g.counts[0] * (m[1] + g.counts[1] * m[2]);
  }
  static Coord grid_coord(const EuclideanGrid& g, std::array<std::size_t, 3> m) {
    Coord c{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) c[d] = g.origin[d] + g.spacing * static_cast<double>(m[d]);
    return c;
  }

  void validate_weights() const {
    if (weights_.size() != n_) throw Error("MalformedSpace", "weights length does not match point count");
    bool positive = false;
    for (double w : weights_) {
      if (!(w >= 0) || !std::isfinite(w)) throw Error("NegativeWeight", "reference weights must be nonnegative");
      positive = positive || w > 0;
    }
    if (!positive) throw Error("NegativeWeight", "at least one reference weight must be positive");
  }

  void validate_metric() const {
    double scale = 0.0;
    for (double d : dense_) {
      if (!(d >= 0) || std::isnan(d)) throw Error("NotAMetric", "distances must be nonnegative");
      if (d != kInf) scale = std::max(scale, d);
    }
    const double slack = 1e-12 * std::max(1.0, scale);
    for (std::size_t i = 0; i < n_; ++i) {
      if (dense_[i * n_ + i] != 0.0) throw Error("NotAMetric", "nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(dense_[i * n_ + j] - dense_[j * n_ + i]) > slack)
          throw Error("NotAMetric", "asymmetric distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        const double dik = dense_[i * n_ + k];
        for (std::size_t j = 0; j < n_; ++j)
          if (dense_[i * n_ + j] > dik + dense_[k * n_ + j] + slack)
            throw Error("TriangleViolation", "d(" + std::to_string(i) + "," + std::to_string(j) + ") > d(" +
                                                 std::to_string(i) + "," + std::to_string(k) + ") + d(" +
                                                 std::to_string(k) + "," + std::to_string(j) + ")");
      }
  }

  std::size_t n_ = 0;
  Model model_;
  std::vector<double> dense_;
  std::vector<std::size_t> next_;
  std::vector<Coord> coords_;
  std::vector<double> weights_;
};

/// Points z with d(x,z) ~ t d(x,y) and d(z,y) ~ (1-t) d(x,y).
inline std::vector<std::size_t> midpoint_set(const MetricMeasureSpace& space, std::size_t x, std::size_t y,
                                             double t, double tol) {
  std::vector<std::size_t> out;
  if (x == y) return {x};
  const double dxy = space.distance(x, y);
  for (std::size_t z = 0; z < space.size(); ++z) {
    if (std::abs(space.distance(x, z) - t * dxy) <= tol &&
        std::abs(space.distance(z, y) - (1.0 - t) * dxy) <= tol)
      out.push_back(z);
  }
  return out;
}

inline std::vector<std::size_t> midpoint_set(const MetricMeasureSpace& space, std::size_t x, std::size_t y,
                                             double t) {
  return midpoint_set(space, x, y, t, space.default_midpoint_tol());
}

/// Constant-speed geodesic sampled at `samples` equally spaced times.
inline GeodesicPath geodesic(const MetricMeasureSpace& space, std::size_t x, std::size_t y,
                             std::size_t samples) {
  GeodesicPath path;
  path.from = x;
  path.to = y;
  path.length = space.distance(x, y);
  if (path.length == kInf) throw Error("Disconnected", "no path between points");
  if (samples < 2) samples = 2;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    Location loc = space.interpolate(x, y, t);
    auto [idx, snap] = space.snap(loc);
    path.ts.push_back(t);
    path.locations.push_back(loc);
    path.nearest.push_back(idx);
    path.snap.push_back(snap);
  }
  return path;
}

/// max |d(g_s, g_t) - |s-t| d(g_0, g_1)| over all sampled pairs.
inline double constant_speed_residual(const MetricMeasureSpace& space, const GeodesicPath& path) {
  double worst = 0.0;
  for (std::size_t a = 0; a < path.ts.size(); ++a)
    for (std::size_t b = a + 1; b < path.ts.size(); ++b) {
      const double d = space.distance(path.locations[a], path.locations[b]);
      worst = std::max(worst, std::abs(d - std::abs(path.ts[b] - path.ts[a]) * path.length));
    }
  return worst;
}

/// Neighborhood slopes of f: maxima of difference quotients over the
/// h-ball around each point.
inline SlopeField slopes(const MetricMeasureSpace& space, std::span<const double> f, double h) {
  if (f.size() != space.size()) throw Error("SizeMismatch", "function length does not match space");
  SlopeField s;
  s.radius = h;
  const std::size_t n = space.size();
  s.abs.assign(n, 0.0);
  s.plus.assign(n, 0.0);
  s.minus.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto nb = space.neighbors(x, h);
    if (nb.empty()) throw Error("EmptyNeighborhood", "point " + std::to_string(x) + " has no neighbor within h");
    for (std::size_t y : nb) {
      const double d = space.distance(x, y);
      if (d <= 0) continue;
      const double diff = f[y] - f[x];
      s.abs[x] = std::max(s.abs[x], std::abs(diff) / d);
      s.plus[x] = std::max(s.plus[x], pos_part(diff) / d);
      s.minus[x] = std::max(s.minus[x], neg_part(diff) / d);
    }
  }
  return s;
}

/// Default slope radius: 1.5 grid steps.
inline double default_slope_radius(const MetricMeasureSpace& space) { return 1.5 * space.spacing(); }

}  // namespace wassergeo
