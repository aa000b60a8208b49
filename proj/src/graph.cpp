#include "subcount/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>

#include "subcount/json.hpp"

namespace subcount {

NodeSet::NodeSet(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw GraphError("NodeSet: duplicate node id");
  }
}

bool NodeSet::contains(Node v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

Graph::Graph(int n, std::span<const NodePair> edges) : n_(n) {
  if (n < 0) throw GraphError("Graph: negative node count");
  nbrs_.resize(n);
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
  for (const auto& e : edges) {
    if (e.i < 0 || e.j >= n || e.i >= n || e.j < 0) {
      throw GraphError("Graph: endpoint out of range {" + std::to_string(e.i) + "," +
                       std::to_string(e.j) + "} for n=" + std::to_string(n));
    }
    if (e.i == e.j) throw GraphError("Graph: self-loop at node " + std::to_string(e.i));
    auto& cell = adj_[static_cast<std::size_t>(e.i) * n + e.j];
    if (cell) {
      throw GraphError("Graph: duplicate edge {" + std::to_string(e.i) + "," +
                       std::to_string(e.j) + "}");
    }
    cell = 1;
    adj_[static_cast<std::size_t>(e.j) * n + e.i] = 1;
    nbrs_[e.i].push_back(e.j);
    nbrs_[e.j].push_back(e.i);
    ++m_;
  }
  for (auto& list : nbrs_) std::sort(list.begin(), list.end());
}

Graph Graph::complete(int n) {
  std::vector<NodePair> e;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

Graph Graph::path(int n) {
  std::vector<NodePair> e;
  for (Node i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph Graph::cycle(int n) {
  std::vector<NodePair> e;
  for (Node i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n >= 3) e.emplace_back(0, n - 1);
  return Graph(n, e);
}

std::vector<NodePair> Graph::edges() const {
  std::vector<NodePair> out;
  out.reserve(m_);
  for (Node i = 0; i < n_; ++i)
    for (Node j : nbrs_[i])
      if (j > i) out.emplace_back(i, j);
  return out;
}

void Graph::check_node(Node v) const {
  if (v < 0 || v >= n_) {
    throw GraphError("node " + std::to_string(v) + " out of range for n=" + std::to_string(n_));
  }
}

NodeSet ball(const Graph& g, Node root, int radius) {
  if (root < 0 || root >= g.num_nodes()) throw GraphError("egonet: root out of range");
  std::vector<int> dist(g.num_nodes(), -1);
  std::vector<Node> order{root};
  dist[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    Node v = order[head];
    if (dist[v] == radius) continue;
    for (Node w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        order.push_back(w);
      }
    }
  }
  return NodeSet(std::move(order));
}

Subgraph egonet(const Graph& g, Node root, int radius) {
  NodeSet s = ball(g, root, radius);
  return {induced_subgraph(g, s), std::vector<Node>(s.begin(), s.end())};
}

Graph induced_subgraph(const Graph& g, const NodeSet& s) {
  std::vector<int> local(g.num_nodes(), -1);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= g.num_nodes()) throw GraphError("induced_subgraph: node out of range");
    local[s[k]] = static_cast<int>(k);
  }
  std::vector<NodePair> e;
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (Node w : g.neighbors(s[k])) {
      if (local[w] > static_cast<int>(k)) e.emplace_back(static_cast<Node>(k), local[w]);
    }
  }
  return Graph(static_cast<int>(s.size()), e);
}

Graph edge_flip(const Graph& g, Node i, Node j) {
  g.check_node(i);
  g.check_node(j);
  if (i == j) throw GraphError("edge_flip: self-loop {" + std::to_string(i) + "," + std::to_string(i) + "}");
  Graph out = g;
  const auto n = static_cast<std::size_t>(g.n_);
  auto& ij = out.adj_[i * n + j];
  auto& ji = out.adj_[j * n + i];
  auto& ni = out.nbrs_[i];
  auto& nj = out.nbrs_[j];
  if (ij) {
    ij = ji = 0;
    ni.erase(std::lower_bound(ni.begin(), ni.end(), j));
    nj.erase(std::lower_bound(nj.begin(), nj.end(), i));
    --out.m_;
  } else {
    ij = ji = 1;
    ni.insert(std::lower_bound(ni.begin(), ni.end(), j), j);
    nj.insert(std::lower_bound(nj.begin(), nj.end(), i), i);
    ++out.m_;
  }
  return out;
}

namespace {

std::vector<int> bfs_distances(const Graph& g, Node src) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<Node> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    Node v = queue.front();
    queue.pop_front();
    for (Node w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  auto d = bfs_distances(g, 0);
  return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

int diameter(const Graph& g) {
  int best = 0;
  for (Node v = 0; v < g.num_nodes(); ++v) {
    for (int d : bfs_distances(g, v)) {
      if (d < 0) throw GraphError("diameter: graph is disconnected");
      best = std::max(best, d);
    }
  }
  return best;
}

bool is_isomorphic_small(const Graph& a, const Graph& b) {
  if (a.num_nodes() > 4 || b.num_nodes() > 4) {
    throw GraphError("is_isomorphic_small: only graphs with at most 4 nodes are supported");
  }
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) return false;
  const int n = a.num_nodes();
  std::array<int, 4> perm{};
  std::iota(perm.begin(), perm.begin() + n, 0);
  do {
    bool ok = true;
    for (Node i = 0; i < n && ok; ++i)
      for (Node j = i + 1; j < n && ok; ++j)
        ok = a.has_edge(i, j) == b.has_edge(perm[i], perm[j]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.begin() + n));
  return false;
}

std::string to_json_text(const Graph& g) { return to_ordered_json(g).dump(); }

Graph graph_from_json_text(const std::string& text) {
  return graph_from_json(nlohmann::json::parse(text));
}

std::uint64_t fingerprint(const Graph& g) {
  // FNV-1a over (n, edges).
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(g.num_nodes()));
  for (const auto& e : g.edges()) {
    mix(static_cast<std::uint64_t>(e.i));
    mix(static_cast<std::uint64_t>(e.j));
  }
  return h;
}

}  // namespace subcount
