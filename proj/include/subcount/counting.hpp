#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "subcount/graph.hpp"
#include "subcount/pattern.hpp"

namespace subcount {

using Count = std::int64_t;

/// Induced counts for all eight patterns.
class CountVector {
 public:
  CountVector() { counts_.fill(0); }

  Count& operator[](Pattern p) { return counts_[static_cast<int>(p)]; }
  Count operator[](Pattern p) const { return counts_[static_cast<int>(p)]; }

  friend bool operator==(const CountVector&, const CountVector&) = default;

 private:
  std::array<Count, kNumPatterns> counts_;
};

/// Node subsets inducing a pattern, sorted.
using OccurrenceSet = std::vector<NodeSet>;

/// Exact induced count using the edge-anchored neighborhood scan.
Count count_induced(const Graph& g, Pattern h);

/// Every pattern in one pass over edges and connected triplets.
CountVector count_all(const Graph& g);

OccurrenceSet enumerate_induced(const Graph& g, Pattern h);

/// Exhaustive C(n,k) subset enumeration; testing oracle.
Count count_bruteforce(const Graph& g, Pattern h);
OccurrenceSet enumerate_bruteforce(const Graph& g, Pattern h);

/// Pattern induced by a connected 4-node set, identified by its local adjacency.
/// `mask` bit order: 01,02,03,12,13,23. Returns nullopt for disconnected sets.
std::optional<Pattern> classify_four(unsigned mask);

}  // namespace subcount
