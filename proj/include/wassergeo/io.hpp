#pragma once

// JSON and CSV plumbing for spaces, measures, costs and reports.
// Schemas are described in docs/formats.md.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wassergeo/core.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/space.hpp"

namespace wassergeo::io {

using json = nlohmann::json;

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("InputNotFound", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("MalformedInput", path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("OutputFailed", "cannot write " + path.string());
  out << text;
}

/// Deterministic rendering: sorted keys, shortest round-trip doubles.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw Error("MalformedInput", what + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("MalformedInput", what + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("MalformedInput", std::string(key) + ": " + e.what());
  }
}

inline MetricMeasureSpace space_from_json(const json& j) {
  if (!j.is_object()) throw Error("MalformedInput", "space must be a JSON object");
  if (j.contains("dist")) {
    auto dist = get<std::vector<std::vector<double>>>(j, "dist", "space");
    std::vector<double> w = get_or<std::vector<double>>(j, "weights", {});
    if (w.empty()) w.assign(dist.size(), 1.0 / static_cast<double>(std::max<std::size_t>(1, dist.size())));
    return MetricMeasureSpace::from_matrix(std::move(dist), std::move(w));
  }
  const auto model = get<std::string>(j, "model", "space");
  const json params = j.contains("params") ? j.at("params") : json::object();
  const auto weights = get_or<std::vector<double>>(params, "weights", {});
  if (model == "euclidean_grid") {
    const int dim = get<int>(params, "dim", "params");
    const auto counts = get<std::vector<std::size_t>>(params, "counts", "params");
    const double h = get<double>(params, "spacing", "params");
    const auto origin = get_or<std::vector<double>>(params, "origin", {});
    if (dim < 1 || dim > 3 || counts.size() != static_cast<std::size_t>(dim))
      throw Error("MalformedInput", "grid counts must have one entry per dimension");
    std::array<std::size_t, 3> c{1, 1, 1};
    Coord o{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      c[d] = counts[d];
      if (d < static_cast<int>(origin.size())) o[d] = origin[d];
    }
    return MetricMeasureSpace::euclidean_grid(dim, c, h, o, weights);
  }
  if (model == "interval") {
    const double a = get<double>(params, "a", "params");
    const double b = get<double>(params, "b", "params");
    const auto n = get<std::size_t>(params, "count", "params");
    if (n < 2) throw Error("MalformedInput", "interval needs at least two points");
    return MetricMeasureSpace::euclidean_grid(1, {n, 1, 1}, (b - a) / static_cast<double>(n - 1), {a, 0, 0},
                                              weights);
  }
  if (model == "circle") {
    return MetricMeasureSpace::circle(get<double>(params, "radius", "params"), get<std::size_t>(params, "n", "params"),
                                      weights);
  }
  if (model == "graph") {
    const auto n = get<std::size_t>(params, "n", "params");
    std::vector<GraphEdge> edges;
    for (const auto& e : get<json>(params, "edges", "params")) {
      GraphEdge g;
      if (e.is_array()) {
        if (e.size() < 3) throw Error("MalformedInput", "graph edge needs [u, v, length]");
        g.u = e[0].get<std::size_t>();
        g.v = e[1].get<std::size_t>();
        g.length = e[2].get<double>();
        if (e.size() > 3) g.weight = e[3].get<double>();
      } else {
        g.u = get<std::size_t>(e, "u", "edge");
        g.v = get<std::size_t>(e, "v", "edge");
        g.length = get<double>(e, "length", "edge");
        g.weight = get_or<double>(e, "weight", 1.0);
      }
      edges.push_back(g);
    }
    return MetricMeasureSpace::graph(n, std::move(edges), weights);
  }
  throw Error("MalformedInput", "unknown space model '" + model + "'");
}

/// Space given inline or as a path relative to `base`.
inline MetricMeasureSpace resolve_space(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) return space_from_json(read_json(base / j.get<std::string>()));
  return space_from_json(j);
}

inline DiscreteMeasure measure_from_json(const json& j) {
  DiscreteMeasure m;
  try {
    if (j.is_array())
      m.mass = j.get<std::vector<double>>();
    else
      m.mass = get<std::vector<double>>(j, "mass", "measure");
  } catch (const json::exception& e) {
    throw Error("MalformedInput", std::string("measure: ") + e.what());
  }
  return m;
}

/// "power:2", "orlicz:exp_m1_mr", "orlicz:cosh_m1@0.5".
inline CostModel cost_from_string(const std::string& s) {
  if (s.rfind("power:", 0) == 0) return CostModel::power(std::stod(s.substr(6)));
  if (s.rfind("orlicz:", 0) == 0) {
    std::string rest = s.substr(7);
    double lambda = 1.0;
    if (auto at = rest.find('@'); at != std::string::npos) {
      lambda = std::stod(rest.substr(at + 1));
      rest = rest.substr(0, at);
    }
    return CostModel::orlicz(OrliczFunction::by_name(rest), lambda);
  }
  throw Error("InvalidCost", "unknown cost descriptor '" + s + "'");
}

inline CostModel cost_from_json(const json& j) {
  if (j.is_string()) return cost_from_string(j.get<std::string>());
  const auto kind = get<std::string>(j, "kind", "cost");
  if (kind == "power") return CostModel::power(get<double>(j, "p", "cost"));
  if (kind == "orlicz")
    return CostModel::orlicz(OrliczFunction::by_name(get<std::string>(j, "L", "cost")), get_or<double>(j, "lambda", 1.0));
  throw Error("InvalidCost", "unknown cost kind '" + kind + "'");
}

inline json cost_to_json(const CostModel& c) {
  if (c.is_power()) return {{"kind", "power"}, {"p", c.p}};
  return {{"kind", "orlicz"}, {"L", c.L.name}, {"lambda", c.lambda}};
}

inline json space_summary(const MetricMeasureSpace& s) {
  json j;
  j["points"] = s.size();
  if (const auto* g = std::get_if<EuclideanGrid>(&s.model())) {
    j["model"] = "euclidean_grid";
    j["dim"] = g->dim;
    j["spacing"] = g->spacing;
  } else if (s.is_circle()) {
    j["model"] = "circle";
  } else if (s.is_graph()) {
    j["model"] = "graph";
  } else {
    j["model"] = "raw";
  }
  return j;
}

/// Full-space potential (aligned with point order; null outside the domain).
inline json potential_to_json(const Potential& p, std::size_t n) {
  json arr = json::array();
  std::vector<const double*> slot(n, nullptr);
  for (std::size_t k = 0; k < p.domain.size(); ++k) slot[p.domain[k]] = &p.values[k];
  for (std::size_t i = 0; i < n; ++i) arr.push_back(slot[i] ? json(*slot[i]) : json(nullptr));
  return arr;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string coupling_csv(const Coupling& c) {
  std::string out = "x_index,y_index,mass\n";
  for (const auto& e : c.entries)
    out += std::to_string(e.x) + "," + std::to_string(e.y) + "," + format_double(e.mass) + "\n";
  return out;
}

inline json solution_summary(const OTSolution& s) {
  return {{"primal", s.primal}, {"dual", s.dual}, {"gap", s.gap}, {"row_residual", s.coupling.row_residual},
          {"col_residual", s.coupling.col_residual}, {"atoms", s.coupling.entries.size()}};
}

}  // namespace wassergeo::io
