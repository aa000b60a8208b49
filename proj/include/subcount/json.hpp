#pragma once

// JSON conversions for the on-disk and wire formats.

#include <json.hpp>

#include "subcount/graph.hpp"

namespace subcount {

/// {"n":N,"edges":[[i,j],...]} with the keys in that order.
nlohmann::ordered_json to_ordered_json(const Graph& g);

/// Accepts any key order; validates the graph invariants.
Graph graph_from_json(const nlohmann::json& j);

}  // namespace subcount
