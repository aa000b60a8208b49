#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "subcount/graph.hpp"

namespace subcount {

/// The eight connected graphlets on three and four nodes.
enum class Pattern : int {
  Triangle = 0,
  TwoPath,
  FourClique,
  ChordalCycle,
  TailedTriangle,
  ThreeStar,
  FourCycle,
  ThreePath,
};

inline constexpr std::size_t kNumPatterns = 8;

inline constexpr std::array<Pattern, kNumPatterns> kAllPatterns = {
    Pattern::Triangle,       Pattern::TwoPath,   Pattern::FourClique, Pattern::ChordalCycle,
    Pattern::TailedTriangle, Pattern::ThreeStar, Pattern::FourCycle,  Pattern::ThreePath,
};

struct PatternInfo {
  std::string_view name;  // serialization key
  int size;
  int diameter;
  int two_paths;  // induced 2-paths inside the pattern
  int triangles;

  /// Number of times the edge-anchored triplet scan meets one occurrence.
  [[nodiscard]] constexpr int normalization() const { return 2 * two_paths + 3 * triangles; }
};

constexpr PatternInfo info(Pattern p) {
  constexpr std::array<PatternInfo, kNumPatterns> table = {{
      {"triangle", 3, 1, 0, 1},
      {"2path", 3, 2, 1, 0},
      {"4clique", 4, 1, 0, 4},
      {"chordal_cycle", 4, 2, 2, 2},
      {"tailed_triangle", 4, 2, 2, 1},
      {"3star", 4, 2, 3, 0},
      {"4cycle", 4, 2, 4, 0},
      {"3path", 4, 3, 2, 0},
  }};
  return table[static_cast<int>(p)];
}

/// Largest pattern diameter; one egonet of this radius covers every pattern.
inline constexpr int kMaxPatternDiameter = 3;

constexpr std::string_view name(Pattern p) { return info(p).name; }

std::optional<Pattern> pattern_from_name(std::string_view name);

/// Throws std::invalid_argument for unknown names.
Pattern parse_pattern(std::string_view name);

/// Canonical labeled graph of the pattern.
const Graph& pattern_graph(Pattern p);

}  // namespace subcount
