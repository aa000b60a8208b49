#include "subcount/pattern.hpp"

#include <stdexcept>
#include <string>

#include "subcount/json.hpp"

namespace subcount {

std::optional<Pattern> pattern_from_name(std::string_view n) {
  for (Pattern p : kAllPatterns)
    if (name(p) == n) return p;
  return std::nullopt;
}

Pattern parse_pattern(std::string_view n) {
  if (auto p = pattern_from_name(n)) return *p;
  throw std::invalid_argument("unknown pattern name '" + std::string(n) + "'");
}

const Graph& pattern_graph(Pattern p) {
  static const std::array<Graph, kNumPatterns> graphs = {
      Graph(3, {{0, 1}, {1, 2}, {0, 2}}),
      Graph(3, {{0, 1}, {1, 2}}),
      Graph::complete(4),
      Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}),
      Graph(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}),
      Graph(4, {{0, 1}, {0, 2}, {0, 3}}),
      Graph::cycle(4),
      Graph::path(4),
  };
  return graphs[static_cast<int>(p)];
}

nlohmann::ordered_json to_ordered_json(const Graph& g) {
  nlohmann::ordered_json out;
  out["n"] = g.num_nodes();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) edges.push_back({e.i, e.j});
  out["edges"] = std::move(edges);
  return out;
}

Graph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges")) {
    throw GraphError("graph JSON must be an object with \"n\" and \"edges\"");
  }
  const int n = j.at("n").get<int>();
  std::vector<NodePair> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw GraphError("graph JSON: edge must be a pair");
    edges.emplace_back(e[0].get<Node>(), e[1].get<Node>());
  }
  return Graph(n, edges);
}

}  // namespace subcount
