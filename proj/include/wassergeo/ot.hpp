#pragma once

// Exact discrete optimal transport: a primal network simplex on the
// bipartite support graph, dual recovery with c-concave cleanup, and the
// p-Wasserstein distance in two normalizations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wassergeo/core.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo {

/// Mass vector over the points of a space.
struct DiscreteMeasure {
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (mass[i] > 0) s.push_back(i);
    return s;
  }

  static DiscreteMeasure dirac(std::size_t n, std::size_t at) {
    DiscreteMeasure m;
    m.mass.assign(n, 0.0);
    m.mass[at] = 1.0;
    return m;
  }

  /// Normalized restriction of the reference measure of a space.
  static DiscreteMeasure reference(const MetricMeasureSpace& space) {
    DiscreteMeasure m;
    m.mass.assign(space.weights().begin(), space.weights().end());
    m.normalize();
    return m;
  }

  void normalize() {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0)) throw Error("InvalidMeasure", "measure has no mass");
    for (auto& m : mass) m /= total;
  }
};

inline void validate_measure(const MetricMeasureSpace& space, const DiscreteMeasure& mu) {
  if (mu.size() != space.size()) throw Error("SizeMismatch", "measure length does not match space");
  double total = 0.0;
  for (double m : mu.mass) {
    if (!(m >= 0)) throw Error("NegativeWeight", "measure has a negative or NaN entry");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("UnbalancedMasses", "measure is not normalized");
}

struct CouplingEntry {
  std::size_t x = 0;
  std::size_t y = 0;
  double mass = 0.0;
};

struct Coupling {
  std::vector<CouplingEntry> entries;  // sorted by (x, y), positive masses
  double row_residual = 0.0;
  double col_residual = 0.0;
};

struct OTSolution {
  Coupling coupling;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  Potential phi;  // on supp mu0
  Potential psi;  // on supp mu1
  std::size_t pivots = 0;
};

/// Result of the bipartite transport LP in local indices.
struct TransportResult {
  std::vector<std::tuple<std::size_t, std::size_t, double>> flows;
  std::vector<double> u;  // row duals
  std::vector<double> v;  // column duals, u_i + v_j <= c_ij
  std::size_t pivots = 0;
};

namespace detail {

/// Primal network simplex for the uncapacitated transportation problem with
/// an artificial root and a strongly feasible spanning tree (block pivoting,
/// leaving arc by the last-blocking rule on the second side).
class NetworkSimplex {
public:
  NetworkSimplex(std::span<const double> a, std::span<const double> b, const CostMatrix& c)
      : n1_(a.size()), n2_(b.size()), nn_(n1_ + n2_), root_(nn_), m_(n1_ * n2_), c_(c.data()) {
    double maxc = 0.0;
    for (std::size_t e = 0; e < m_; ++e) maxc = std::max(maxc, std::abs(c_[e]));
    eps_ = 1e-13 * (1.0 + maxc);
    const double art = (maxc + 1.0) * static_cast<double>(nn_ + 1);

    const std::size_t arcs = m_ + nn_;
    flow_.assign(arcs, 0.0);
    state_.assign(arcs, 1);
    asrc_.resize(nn_);
    atgt_.resize(nn_);
    acost_.resize(nn_);
    parent_.assign(nn_ + 1, npos);
    pred_.assign(nn_ + 1, npos);
    dir_.assign(nn_ + 1, 0);
    depth_.assign(nn_ + 1, 0);
    pi_.assign(nn_ + 1, 0.0);
    adj_.assign(nn_ + 1, {});

    for (std::size_t u = 0; u < nn_; ++u) {
      const std::size_t e = m_ + u;
      const double supply = u < n1_ ? a[u] : -b[u - n1_];
      state_[e] = 0;
      parent_[u] = root_;
      pred_[u] = e;
      depth_[u] = 1;
      if (supply >= 0) {
        asrc_[u] = u;
        atgt_[u] = root_;
        acost_[u] = 0.0;
        flow_[e] = supply;
        dir_[u] = kUp;
        pi_[u] = 0.0;
      } else {
        asrc_[u] = root_;
        atgt_[u] = u;
        acost_[u] = art;
        flow_[e] = -supply;
        dir_[u] = kDown;
        pi_[u] = art;
      }
      adj_[u].push_back(e);
      adj_[root_].push_back(e);
    }
    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(m_))));
  }

  TransportResult run() {
    TransportResult res;
    const std::size_t limit = 50 * (m_ + nn_) + 100000;
    while (find_entering()) {
      pivot();
      if (++res.pivots > limit) throw Error("SolverStalled", "network simplex exceeded its pivot budget");
    }
    for (std::size_t e = 0; e < m_; ++e)
      if (flow_[e] > 0) res.flows.emplace_back(e / n2_, e % n2_, flow_[e]);
    res.u.resize(n1_);
    res.v.resize(n2_);
    for (std::size_t i = 0; i < n1_; ++i) res.u[i] = -pi_[i];
    for (std::size_t j = 0; j < n2_; ++j) res.v[j] = pi_[n1_ + j];
    return res;
  }

private:
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;

  std::size_t source(std::size_t e) const { return e < m_ ? e / n2_ : asrc_[e - m_]; }
  std::size_t target(std::size_t e) const { return e < m_ ? n1_ + e % n2_ : atgt_[e - m_]; }
  double cost(std::size_t e) const { return e < m_ ? c_[e] : acost_[e - m_]; }

  bool find_entering() {
    double best = -eps_;
    std::size_t cnt = block_;
    std::size_t e = next_;
    for (std::size_t k = 0; k < m_; ++k) {
      if (state_[e] != 0) {
        const std::size_t i = e / n2_, j = e % n2_;
        const double rc = c_[e] + pi_[i] - pi_[n1_ + j];
        if (rc < best) {
          best = rc;
          in_ = e;
        }
      }
      if (++e == m_) e = 0;
      if (--cnt == 0) {
        if (best < -eps_) break;
        cnt = block_;
      }
    }
    if (!(best < -eps_)) return false;
    next_ = e;
    return true;
  }

  void pivot() {
    const std::size_t s = source(in_), t = target(in_);
    std::size_t u = s, v = t;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const std::size_t join = u;

    // Entering arcs are at their lower bound: the cycle runs s -> t.
    const std::size_t first = s, second = t;
    double delta = kInf;
    std::size_t u_out = npos;
    int side = 0;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      const double d = dir_[w] == kUp ? flow_[pred_[w]] : kInf;
      if (d < delta) {
        delta = d;
        u_out = w;
        side = 1;
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      const double d = dir_[w] == kDown ? flow_[pred_[w]] : kInf;
      if (d <= delta) {
        delta = d;
        u_out = w;
        side = 2;
      }
    }
    if (side == 0) throw Error("Unbounded", "transport problem is unbounded");
    const std::size_t u_in = side == 1 ? first : second;
    const std::size_t v_in = side == 1 ? second : first;

    if (delta > 0) {
      flow_[in_] += delta;
      for (std::size_t w = s; w != join; w = parent_[w]) flow_[pred_[w]] -= dir_[w] * delta;
      for (std::size_t w = t; w != join; w = parent_[w]) flow_[pred_[w]] += dir_[w] * delta;
    }
    const std::size_t out = pred_[u_out];
    flow_[out] = 0.0;
    state_[out] = 1;
    state_[in_] = 0;

    remove_adj(u_out, out);
    remove_adj(parent_[u_out], out);
    adj_[s].push_back(in_);
    adj_[t].push_back(in_);

    // Re-hang the detached subtree below v_in.
    attach(u_in, v_in, in_);
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      for (std::size_t e : adj_[w]) {
        if (e == pred_[w]) continue;
        const std::size_t child = source(e) == w ? target(e) : source(e);
        attach(child, w, e);
        stack_.push_back(child);
      }
    }
  }

  void attach(std::size_t w, std::size_t par, std::size_t e) {
    parent_[w] = par;
    pred_[w] = e;
    depth_[w] = depth_[par] + 1;
    if (source(e) == w) {
      dir_[w] = kUp;
      pi_[w] = pi_[par] - cost(e);
    } else {
      dir_[w] = kDown;
      pi_[w] = pi_[par] + cost(e);
    }
  }

  void remove_adj(std::size_t w, std::size_t e) {
    auto& list = adj_[w];
    for (std::size_t k = 0; k < list.size(); ++k)
      if (list[k] == e) {
        list[k] = list.back();
        list.pop_back();
        return;
      }
  }

  std::size_t n1_, n2_, nn_, root_, m_;
  const double* c_;
  double eps_ = 0.0;
  std::size_t block_ = 1;
  std::size_t next_ = 0;
  std::size_t in_ = 0;
  std::vector<double> flow_;
  std::vector<signed char> state_;  // 0 tree, 1 lower bound
  std::vector<std::size_t> asrc_, atgt_;
  std::vector<double> acost_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<int> dir_;
  std::vector<double> pi_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> stack_;
};

}  // namespace detail

/// Solves min sum c_ij pi_ij over couplings of a and b (equal totals).
inline TransportResult transport_simplex(std::span<const double> a, std::span<const double> b, const CostMatrix& c) {
  if (a.empty() || b.empty()) throw Error("EmptyDomain", "transport between empty supports");
  if (c.rows() != a.size() || c.cols() != b.size()) throw Error("SizeMismatch", "cost matrix shape");
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  if (std::abs(sa - sb) > 1e-12 * std::max(1.0, sa)) throw Error("UnbalancedMasses", "marginals differ in total mass");
  detail::NetworkSimplex ns(a, b, c);
  return ns.run();
}

/// Exact Kantorovich solution between two measures on the same space.
/// The dual pair is cleaned to a c-concave pair (phi <- (phi^c)^cbar,
/// psi <- phi^c) and anchored so that phi vanishes at the first support
/// point of mu0.
inline OTSolution solve(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        const CostModel& cost) {
  validate_measure(space, mu0);
  validate_measure(space, mu1);
  const auto X = mu0.support();
  const auto Y = mu1.support();
  std::vector<double> a, b;
  for (auto x : X) a.push_back(mu0.mass[x]);
  for (auto y : Y) b.push_back(mu1.mass[y]);
  const auto C = CostMatrix::build(space, X, Y, cost);
  auto tr = transport_simplex(a, b, C);

  OTSolution sol;
  sol.pivots = tr.pivots;
  std::vector<double> rows(X.size(), 0.0), cols(Y.size(), 0.0);
  for (auto [i, j, m] : tr.flows) {
    sol.coupling.entries.push_back({X[i], Y[j], m});
    sol.primal += m * C(i, j);
    rows[i] += m;
    cols[j] += m;
  }
  for (std::size_t i = 0; i < X.size(); ++i)
    sol.coupling.row_residual = std::max(sol.coupling.row_residual, std::abs(rows[i] - a[i]));
  for (std::size_t j = 0; j < Y.size(); ++j)
    sol.coupling.col_residual = std::max(sol.coupling.col_residual, std::abs(cols[j] - b[j]));

  auto psi = c_transform(std::span<const double>(tr.u), Y.size(), C);
  auto phi = cbar_transform(std::span<const double>(psi), X.size(), C);
  psi = c_transform(std::span<const double>(phi), Y.size(), C);
  const double shift = phi[0];
  for (auto& v : phi) v -= shift;
  for (auto& v : psi) v += shift;
  for (std::size_t i = 0; i < X.size(); ++i) sol.dual += a[i] * phi[i];
  for (std::size_t j = 0; j < Y.size(); ++j) sol.dual += b[j] * psi[j];
  sol.gap = std::abs(sol.primal - sol.dual);
  sol.phi = {X, std::move(phi)};
  sol.psi = {Y, std::move(psi)};
  return sol;
}

/// Extends the Kantorovich potential to every point of the space as
/// psi^cbar, which agrees with phi on supp mu0.
inline std::vector<double> kantorovich_potential(const MetricMeasureSpace& space, const OTSolution& sol,
                                                 const CostModel& cost) {
  const auto X = all_points(space);
  return cbar_transform(space, sol.psi, X, cost).values;
}

enum class Convention { Paper, Standard };

inline Convention parse_convention(const std::string& s) {
  if (s == "paper") return Convention::Paper;
  if (s == "standard") return Convention::Standard;
  throw Error("InvalidParameter", "convention must be 'paper' or 'standard'");
}

inline const char* to_string(Convention c) { return c == Convention::Paper ? "paper" : "standard"; }

/// Paper convention: (min int d^p/p)^{1/p}; standard: (min int d^p)^{1/p}.
inline double wasserstein_p(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                            double p, Convention conv = Convention::Standard) {
  const auto sol = solve(space, mu0, mu1, CostModel::power(p));
  const double value = std::max(0.0, sol.primal);
  const double scaled = conv == Convention::Paper ? value : p * value;
  return std::pow(scaled, 1.0 / p);
}

struct MonotonicityReport {
  bool verdict = true;
  double worst = 0.0;  // largest sum c(x_i,y_i) - sum c(x_i,y_{i+1})
  std::size_t cycles = 0;
};

/// c-cyclical monotonicity of support pairs. Order 2 is exhaustive; higher
/// orders sample random cycles.
inline MonotonicityReport check_cyclical_monotonicity(const MetricMeasureSpace& space,
                                                      std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                                      const CostModel& cost, std::size_t order = 2,
                                                      std::size_t samples = 10000, std::uint64_t seed = 1) {
  if (order < 2) throw Error("InvalidParameter", "cycle order must be at least 2");
  MonotonicityReport rep;
  rep.worst = -kInf;
  auto c = [&](std::size_t a, std::size_t b) { return cost(space.distance(a, b)); };
  const std::size_t n = pairs.size();
  if (n < 2) {
    rep.worst = 0.0;
    return rep;
  }
  if (order == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto [x1, y1] = pairs[i];
        const auto [x2, y2] = pairs[j];
        const double diff = c(x1, y1) + c(x2, y2) - c(x1, y2) - c(x2, y1);
        rep.worst = std::max(rep.worst, diff);
        ++rep.cycles;
      }
  } else {
    SplitMix64 rng(seed);
    std::vector<std::size_t> idx(order);
    for (std::size_t s = 0; s < samples; ++s) {
      for (auto& k : idx) k = rng.below(n);
      double diag = 0.0, shifted = 0.0;
      for (std::size_t k = 0; k < order; ++k) {
        diag += c(pairs[idx[k]].first, pairs[idx[k]].second);
        shifted += c(pairs[idx[k]].first, pairs[idx[(k + 1) % order]].second);
      }
      rep.worst = std::max(rep.worst, diag - shifted);
      ++rep.cycles;
    }
  }
  rep.verdict = rep.worst <= 1e-10;
  return rep;
}

inline std::vector<std::pair<std::size_t, std::size_t>> support_pairs(const Coupling& pi, double threshold = 1e-12) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : pi.entries)
    if (e.mass > threshold) out.emplace_back(e.x, e.y);
  return out;
}

}  // namespace wassergeo
