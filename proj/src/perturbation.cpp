#include "subcount/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace subcount {

std::string op_name(EditOp op) { return op == EditOp::Add ? "add" : "del"; }

EdgeEdit toggle(const Graph& g, Node i, Node j) {
  return {i, j, g.has_edge(i, j) ? EditOp::Delete : EditOp::Add};
}

void validate(const Graph& g, const EdgeEdit& edit) {
  const int n = g.num_nodes();
  if (edit.i < 0 || edit.j >= n || edit.i == edit.j) {
    throw EditError("edit {" + std::to_string(edit.i) + "," + std::to_string(edit.j) +
                    "} is not a valid node pair for n=" + std::to_string(n));
  }
  const bool present = g.has_edge(edit.i, edit.j);
  if (edit.op == EditOp::Add && present) {
    throw EditError("cannot add existing edge {" + std::to_string(edit.i) + "," +
                    std::to_string(edit.j) + "}");
  }
  if (edit.op == EditOp::Delete && !present) {
    throw EditError("cannot delete missing edge {" + std::to_string(edit.i) + "," +
                    std::to_string(edit.j) + "}");
  }
}

std::vector<NodePair> net_toggled_pairs(const EditSequence& seq) {
  std::map<NodePair, int> flips;
  for (const auto& e : seq) ++flips[e.pair()];
  std::vector<NodePair> out;
  for (const auto& [pair, times] : flips)
    if (times % 2 == 1) out.push_back(pair);
  return out;
}

LocalPatch local_patch(const Graph& g, const EdgeEdit& edit, int radius) {
  validate(g, edit);
  Graph flipped = edge_flip(g, edit.i, edit.j);
  // The egonet is taken in the graph that contains {i,j}.
  const Graph& with_edge = edit.op == EditOp::Delete ? g : flipped;
  NodeSet nodes = ball(with_edge, edit.i, radius);
  return {induced_subgraph(g, nodes), induced_subgraph(flipped, nodes),
          std::vector<Node>(nodes.begin(), nodes.end())};
}

Count local_count_delta(const Graph& g, const EdgeEdit& edit, Pattern h) {
  LocalPatch patch = local_patch(g, edit, info(h).diameter);
  return count_induced(patch.after, h) - count_induced(patch.before, h);
}

Perturbed apply_edit(const Graph& g, const CountVector& counts, const EdgeEdit& edit) {
  LocalPatch patch = local_patch(g, edit, kMaxPatternDiameter);
  const CountVector before = count_all(patch.before);
  const CountVector after = count_all(patch.after);
  Perturbed out{edge_flip(g, edit.i, edit.j), counts};
  for (Pattern p : kAllPatterns) out.counts[p] += after[p] - before[p];
  return out;
}

std::vector<EdgeEdit> gen_p1(const Graph& g) {
  std::vector<EdgeEdit> out;
  const int n = g.num_nodes();
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) out.push_back(toggle(g, i, j));
  return out;
}

std::vector<EdgeEdit> gen_p1_count_preserving(const Graph& g, Pattern h, Count count) {
  std::vector<EdgeEdit> out;
  for (const auto& edit : gen_p1(g)) {
    // Update rule: C(G~) = C(G) + C(G~_S) - C(G_S).
    if (count + local_count_delta(g, edit, h) == count) out.push_back(edit);
  }
  return out;
}

namespace {

// Occurrences inside the patch that contain both endpoints, in original ids.
OccurrenceSet touching(const Graph& local, Pattern h, const std::vector<Node>& map,
                       const EdgeEdit& edit) {
  OccurrenceSet out;
  for (const auto& s : enumerate_induced(local, h)) {
    std::vector<Node> ids;
    for (Node v : s) ids.push_back(map[v]);
    NodeSet mapped(std::move(ids));
    if (mapped.contains(edit.i) && mapped.contains(edit.j)) out.push_back(std::move(mapped));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool preserves_occurrences(const Graph& g, const EdgeEdit& edit, Pattern h) {
  LocalPatch patch = local_patch(g, edit, info(h).diameter);
  return touching(patch.before, h, patch.to_original, edit) ==
         touching(patch.after, h, patch.to_original, edit);
}

std::vector<EdgeEdit> gen_p1_subgraph_preserving(const Graph& g, Pattern h,
                                                 const OccurrenceSet& occ) {
  std::vector<EdgeEdit> out;
  for (const auto& edit : gen_p1(g)) {
    // Only occurrences containing both endpoints can change, and all of them
    // lie inside the patch. The edit preserves the set iff the members of
    // `occ` touching {i,j} are exactly those found in the perturbed patch.
    OccurrenceSet old_touching;
    for (const auto& s : occ)
      if (s.contains(edit.i) && s.contains(edit.j)) old_touching.push_back(s);
    LocalPatch patch = local_patch(g, edit, info(h).diameter);
    if (touching(patch.after, h, patch.to_original, edit) == old_touching) out.push_back(edit);
  }
  return out;
}

std::vector<EdgeEdit> sample_edits_degree_weighted(const Graph& g, std::size_t m,
                                                   std::mt19937_64& rng) {
  std::vector<EdgeEdit> all = gen_p1(g);
  if (m > all.size()) {
    throw std::invalid_argument("sample size " + std::to_string(m) + " exceeds the " +
                                std::to_string(all.size()) + " available edits");
  }
  std::vector<double> weight(all.size());
  bool any_positive = false;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const double di = g.degree(all[k].i);
    const double dj = g.degree(all[k].j);
    weight[k] = di * di + dj * dj;
    any_positive = any_positive || weight[k] > 0;
  }
  if (!any_positive) std::fill(weight.begin(), weight.end(), 1.0);

  // Efraimidis-Spirakis: take the m largest keys log(u)/w. Zero-weight edits
  // rank after all positive ones, in uniformly random order.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  struct Keyed {
    bool positive;
    double key;
    std::size_t index;
  };
  std::vector<Keyed> keys(all.size());
  for (std::size_t k = 0; k < all.size(); ++k) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    keys[k] = weight[k] > 0 ? Keyed{true, std::log(u) / weight[k], k} : Keyed{false, u, k};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(m), keys.end(),
                    [](const Keyed& a, const Keyed& b) {
                      if (a.positive != b.positive) return a.positive;
                      if (a.key != b.key) return a.key > b.key;
                      return a.index < b.index;
                    });
  std::vector<EdgeEdit> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k) out.push_back(all[keys[k].index]);
  return out;
}

}  // namespace subcount
