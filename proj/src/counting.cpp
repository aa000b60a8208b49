#include "subcount/counting.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace subcount {

namespace {

// Local pair order used by the 4-node adjacency mask.
constexpr std::array<std::array<int, 2>, 6> kPairs = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

std::array<std::optional<Pattern>, 64> build_four_table() {
  std::array<std::optional<Pattern>, 64> table{};
  for (unsigned mask = 0; mask < 64; ++mask) {
    std::array<int, 4> deg{};
    int edges = 0;
    for (int b = 0; b < 6; ++b) {
      if (mask & (1U << b)) {
        ++deg[kPairs[b][0]];
        ++deg[kPairs[b][1]];
        ++edges;
      }
    }
    std::sort(deg.begin(), deg.end());
    if (deg[0] == 0) continue;
    switch (edges) {
      case 6: table[mask] = Pattern::FourClique; break;
      case 5: table[mask] = Pattern::ChordalCycle; break;
      case 4:
        table[mask] = deg[0] == 2 ? Pattern::FourCycle : Pattern::TailedTriangle;
        break;
      case 3:
        // Three edges with no isolated node: a tree. Star has a degree-3 hub;
        // otherwise it is a path. Triangle-plus-isolated has deg[0] == 0.
        table[mask] = deg[3] == 3 ? Pattern::ThreeStar : Pattern::ThreePath;
        break;
      default: break;
    }
  }
  return table;
}

const std::array<std::optional<Pattern>, 64>& four_table() {
  static const auto table = build_four_table();
  return table;
}

unsigned four_mask(const Graph& g, Node a, Node b, Node c, Node d) {
  const std::array<Node, 4> v{a, b, c, d};
  unsigned mask = 0;
  for (int k = 0; k < 6; ++k)
    if (g.has_edge(v[kPairs[k][0]], v[kPairs[k][1]])) mask |= 1U << k;
  return mask;
}

// Marks union members of several neighbor lists without duplicates.
class Stamp {
 public:
  explicit Stamp(int n) : mark_(n, 0) {}
  void next() { ++gen_; }
  bool insert(Node v) {
    if (mark_[v] == gen_) return false;
    mark_[v] = gen_;
    return true;
  }

 private:
  std::vector<unsigned> mark_;
  unsigned gen_ = 0;
};

// Calls visit(v1, v2, v3, v4, pattern) once per (edge, adjacent v3, adjacent v4).
template <typename Visit>
void scan_four(const Graph& g, Visit&& visit) {
  const int n = g.num_nodes();
  Stamp third(n);
  Stamp fourth(n);
  const auto& table = four_table();
  std::vector<Node> thirds;
  for (Node v1 = 0; v1 < n; ++v1) {
    for (Node v2 : g.neighbors(v1)) {
      if (v2 < v1) continue;
      third.next();
      third.insert(v1);
      third.insert(v2);
      thirds.clear();
      for (Node w : g.neighbors(v1))
        if (third.insert(w)) thirds.push_back(w);
      for (Node w : g.neighbors(v2))
        if (third.insert(w)) thirds.push_back(w);
      for (Node v3 : thirds) {
        fourth.next();
        fourth.insert(v1);
        fourth.insert(v2);
        fourth.insert(v3);
        for (Node src : {v1, v2, v3}) {
          for (Node v4 : g.neighbors(src)) {
            if (!fourth.insert(v4)) continue;
            const auto p = table[four_mask(g, v1, v2, v3, v4)];
            visit(v1, v2, v3, v4, *p);
          }
        }
      }
    }
  }
}

Count normalize(Count raw, Pattern p) {
  const int norm = p == Pattern::Triangle ? 3 : p == Pattern::TwoPath ? 2 : info(p).normalization();
  if (raw % norm != 0) {
    throw std::logic_error("counting: accumulator for " + std::string(name(p)) + " (" +
                           std::to_string(raw) + ") not divisible by " + std::to_string(norm));
  }
  return raw / norm;
}

void count_three(const Graph& g, CountVector& out) {
  Count tri = 0;
  Count path = 0;
  for (Node v1 = 0; v1 < g.num_nodes(); ++v1) {
    for (Node v2 : g.neighbors(v1)) {
      if (v2 < v1) continue;
      for (Node w : g.neighbors(v1)) {
        if (w == v2) continue;
        if (g.has_edge(w, v2)) ++tri;
        else ++path;
      }
      for (Node w : g.neighbors(v2))
        if (w != v1 && !g.has_edge(w, v1)) ++path;
    }
  }
  out[Pattern::Triangle] = normalize(tri, Pattern::Triangle);
  out[Pattern::TwoPath] = normalize(path, Pattern::TwoPath);
}

void count_four(const Graph& g, CountVector& out) {
  std::array<Count, kNumPatterns> acc{};
  scan_four(g, [&](Node, Node, Node, Node, Pattern p) { ++acc[static_cast<int>(p)]; });
  for (Pattern p : kAllPatterns)
    if (info(p).size == 4) out[p] = normalize(acc[static_cast<int>(p)], p);
}

void sort_unique(OccurrenceSet& occ) {
  std::sort(occ.begin(), occ.end());
  occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
}

template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k > n) return;
  std::vector<Node> idx(k);
  for (int a = 0; a < k; ++a) idx[a] = a;
  while (true) {
    fn(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int a = pos + 1; a < k; ++a) idx[a] = idx[a - 1] + 1;
  }
}

}  // namespace

std::optional<Pattern> classify_four(unsigned mask) { return four_table().at(mask & 63U); }

CountVector count_all(const Graph& g) {
  CountVector out;
  count_three(g, out);
  count_four(g, out);
  return out;
}

Count count_induced(const Graph& g, Pattern h) {
  CountVector out;
  if (info(h).size == 3) count_three(g, out);
  else count_four(g, out);
  return out[h];
}

OccurrenceSet enumerate_induced(const Graph& g, Pattern h) {
  OccurrenceSet occ;
  if (info(h).size == 3) {
    const bool want_triangle = h == Pattern::Triangle;
    for (Node v1 = 0; v1 < g.num_nodes(); ++v1) {
      for (Node v2 : g.neighbors(v1)) {
        if (v2 < v1) continue;
        for (Node w : g.neighbors(v1))
          if (w != v2 && g.has_edge(w, v2) == want_triangle) occ.push_back(NodeSet{v1, v2, w});
        if (!want_triangle) {
          for (Node w : g.neighbors(v2))
            if (w != v1 && !g.has_edge(w, v1)) occ.push_back(NodeSet{v1, v2, w});
        }
      }
    }
  } else {
    scan_four(g, [&](Node a, Node b, Node c, Node d, Pattern p) {
      if (p == h) occ.push_back(NodeSet{a, b, c, d});
    });
  }
  sort_unique(occ);
  return occ;
}

OccurrenceSet enumerate_bruteforce(const Graph& g, Pattern h) {
  OccurrenceSet occ;
  const Graph& target = pattern_graph(h);
  for_each_subset(g.num_nodes(), info(h).size, [&](const std::vector<Node>& subset) {
    NodeSet s(subset);
    if (is_isomorphic_small(induced_subgraph(g, s), target)) occ.push_back(std::move(s));
  });
  return occ;
}

Count count_bruteforce(const Graph& g, Pattern h) {
  return static_cast<Count>(enumerate_bruteforce(g, h).size());
}

}  // namespace subcount
