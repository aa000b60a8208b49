#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subcount {

using Node = int;

/// Unordered node pair stored with first < second.
struct NodePair {
  Node i = 0;
  Node j = 0;

  NodePair() = default;
  NodePair(Node a, Node b) : i(a < b ? a : b), j(a < b ? b : a) {}

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

/// Sorted, duplicate-free set of node ids.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<Node> nodes);
  NodeSet(std::initializer_list<Node> nodes) : NodeSet(std::vector<Node>(nodes)) {}

  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool contains(Node v) const;
  [[nodiscard]] Node operator[](std::size_t k) const { return nodes_[k]; }
  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

  friend auto operator<=>(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<Node> nodes_;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected simple graph on dense node ids 0..n-1.
///
/// Keeps sorted neighbor lists for deterministic iteration and a dense
/// adjacency matrix for O(1) edge membership. Values are immutable after
/// construction; edits return new graphs.
class Graph {
 public:
  Graph() = default;

  /// Throws GraphError on out-of-range endpoints, self-loops, or duplicate pairs.
  Graph(int n, std::span<const NodePair> edges);
  Graph(int n, std::initializer_list<NodePair> edges)
      : Graph(n, std::span<const NodePair>(edges.begin(), edges.size())) {}

  static Graph empty(int n) { return Graph(n, std::span<const NodePair>{}); }
  static Graph complete(int n);
  static Graph path(int n);
  static Graph cycle(int n);

  [[nodiscard]] int num_nodes() const { return n_; }
  [[nodiscard]] std::size_t num_edges() const { return m_; }
  [[nodiscard]] bool has_edge(Node a, Node b) const {
    return adj_[static_cast<std::size_t>(a) * n_ + b] != 0;
  }
  [[nodiscard]] std::span<const Node> neighbors(Node v) const { return nbrs_[v]; }
  [[nodiscard]] int degree(Node v) const { return static_cast<int>(nbrs_[v].size()); }

  /// Edges in lexicographic order.
  [[nodiscard]] std::vector<NodePair> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.adj_ == b.adj_;
  }

 private:
  friend Graph edge_flip(const Graph& g, Node i, Node j);

  void check_node(Node v) const;

  int n_ = 0;
  std::size_t m_ = 0;
  std::vector<std::vector<Node>> nbrs_;
  std::vector<std::uint8_t> adj_;
};

/// Induced subgraph together with the map from local to original node ids.
struct Subgraph {
  Graph graph;
  std::vector<Node> to_original;
};

Subgraph egonet(const Graph& g, Node root, int radius);

/// Sorted node ids within `radius` hops of root.
NodeSet ball(const Graph& g, Node root, int radius);

/// Nodes of S are relabeled 0..|S|-1 in ascending order.
Graph induced_subgraph(const Graph& g, const NodeSet& s);

/// Toggles {i,j}. Throws GraphError on a self-loop or out-of-range request.
Graph edge_flip(const Graph& g, Node i, Node j);

/// Throws GraphError when g is disconnected.
int diameter(const Graph& g);

bool is_connected(const Graph& g);

/// Permutation-enumeration isomorphism test for graphs with at most 4 nodes.
bool is_isomorphic_small(const Graph& a, const Graph& b);

/// Canonical JSON text: {"n":N,"edges":[[i,j],...]} with sorted pairs.
std::string to_json_text(const Graph& g);
Graph graph_from_json_text(const std::string& text);

/// Stable 64-bit fingerprint of the canonical edge structure.
std::uint64_t fingerprint(const Graph& g);

}  // namespace subcount
