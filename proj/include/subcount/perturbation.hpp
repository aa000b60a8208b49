#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "subcount/counting.hpp"
#include "subcount/graph.hpp"

namespace subcount {

enum class EditOp { Add, Delete };

struct EdgeEdit {
  Node i = 0;  // i < j
  Node j = 0;
  EditOp op = EditOp::Add;

  EdgeEdit() = default;
  EdgeEdit(Node a, Node b, EditOp o) : i(a < b ? a : b), j(a < b ? b : a), op(o) {}

  [[nodiscard]] NodePair pair() const { return {i, j}; }

  friend auto operator<=>(const EdgeEdit&, const EdgeEdit&) = default;
};

/// The edit that toggles {i,j} on g.
EdgeEdit toggle(const Graph& g, Node i, Node j);

class EditError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws EditError when the edit adds an existing edge or deletes a missing one.
void validate(const Graph& g, const EdgeEdit& edit);

using EditSequence = std::vector<EdgeEdit>;

/// Distinct pairs whose final state differs from the start, i.e. half of
/// the L0 distance between the adjacency matrices.
std::vector<NodePair> net_toggled_pairs(const EditSequence& seq);

/// Egonet-induced neighborhoods of one edit, before and after the toggle.
struct LocalPatch {
  Graph before;
  Graph after;
  std::vector<Node> to_original;
};

/// Patch on ego_radius(i) taken in whichever of G, G~ contains {i,j}.
LocalPatch local_patch(const Graph& g, const EdgeEdit& edit, int radius);

/// C(G~,H) - C(G,H) computed from the patch of radius diam(H).
Count local_count_delta(const Graph& g, const EdgeEdit& edit, Pattern h);

struct Perturbed {
  Graph graph;
  CountVector counts;
};

/// Applies the edit and updates all eight counts from one radius-3 patch.
Perturbed apply_edit(const Graph& g, const CountVector& counts, const EdgeEdit& edit);

/// All n(n-1)/2 single toggles in lexicographic pair order.
std::vector<EdgeEdit> gen_p1(const Graph& g);

/// Single toggles that leave C(G,H) unchanged. `count` must equal C(G,H).
std::vector<EdgeEdit> gen_p1_count_preserving(const Graph& g, Pattern h, Count count);

/// Single toggles that leave the occurrence set of H unchanged. `occ` must
/// equal enumerate_induced(g, h).
std::vector<EdgeEdit> gen_p1_subgraph_preserving(const Graph& g, Pattern h,
                                                 const OccurrenceSet& occ);

/// True when the edit keeps the occurrence set of H, checked inside the patch.
bool preserves_occurrences(const Graph& g, const EdgeEdit& edit, Pattern h);

/// m distinct toggles drawn without replacement with weight d(i)^2 + d(j)^2.
/// Falls back to uniform weights when every weight is zero. Throws
/// std::invalid_argument when m exceeds n(n-1)/2.
std::vector<EdgeEdit> sample_edits_degree_weighted(const Graph& g, std::size_t m,
                                                   std::mt19937_64& rng);

std::string op_name(EditOp op);

}  // namespace subcount
