#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "subcount/counting.hpp"
#include "subcount/datasets.hpp"

using namespace subcount;

namespace {

OccurrenceSet as_occurrences(const std::vector<std::vector<int>>& raw) {
  OccurrenceSet out;
  for (const auto& s : raw) out.emplace_back(s);
  return out;
}

}  // namespace

TEST_CASE("hand-checked counts") {
  CHECK(count_induced(Graph::complete(4), Pattern::Triangle) == 4);
  const Graph c4 = Graph::cycle(4);
  CHECK(count_induced(c4, Pattern::FourCycle) == 1);
  CHECK(count_induced(c4, Pattern::TwoPath) == 4);
  CHECK(count_induced(c4, Pattern::Triangle) == 0);
  CHECK(count_bruteforce(Graph::complete(4), Pattern::FourClique) == 1);
  for (int n = 5; n <= 10; ++n)
    CHECK(count_induced(Graph::complete(n), Pattern::Triangle) == n * (n - 1) * (n - 2) / 6);
  for (Pattern p : kAllPatterns) {
    CHECK(count_induced(Graph::empty(8), p) == 0);
    CHECK(count_bruteforce(Graph::empty(8), p) == 0);
    CHECK(count_induced(Graph::empty(0), p) == 0);
    CHECK(count_induced(pattern_graph(p), p) == 1);
  }
  // A 3-star with center 0 contains 3 induced 2-paths and no 3-path.
  const Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(count_induced(star, Pattern::ThreeStar) == 1);
  CHECK(count_induced(star, Pattern::TwoPath) == 3);
  CHECK(count_induced(star, Pattern::ThreePath) == 0);
}

TEST_CASE("count_all on K4 and C4") {
  CountVector k4;
  k4[Pattern::FourClique] = 1;
  k4[Pattern::Triangle] = 4;
  CHECK(count_all(Graph::complete(4)) == k4);

  CountVector c4;
  c4[Pattern::FourCycle] = 1;
  c4[Pattern::TwoPath] = 4;
  CHECK(count_all(Graph::cycle(4)) == c4);
}

TEST_CASE("enumeration examples") {
  CHECK(enumerate_induced(Graph::complete(3), Pattern::Triangle) == OccurrenceSet{NodeSet{0, 1, 2}});
  CHECK(enumerate_induced(Graph::path(4), Pattern::TwoPath) == OccurrenceSet{NodeSet{0, 1, 2}, NodeSet{1, 2, 3}});
  CHECK(enumerate_induced(Graph::path(4), Pattern::ThreePath) == OccurrenceSet{NodeSet{0, 1, 2, 3}});

  std::mt19937_64 rng(10);
  const Graph g = oracle::random_graph(10, 0.5, rng);
  CHECK(enumerate_induced(g, Pattern::ChordalCycle) ==
        as_occurrences(oracle::occurrences(g, Pattern::ChordalCycle)));
}

TEST_CASE("every pattern agrees with the subset oracle on ER(12, 0.4)") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const Graph g = oracle::random_graph(12, 0.4, rng);
    const CountVector all = count_all(g);
    for (Pattern p : kAllPatterns) {
      const auto expect = oracle::occurrences(g, p);
      CHECK(count_induced(g, p) == static_cast<Count>(expect.size()));
      CHECK(count_bruteforce(g, p) == static_cast<Count>(expect.size()));
      CHECK(all[p] == static_cast<Count>(expect.size()));
      CHECK(enumerate_induced(g, p) == as_occurrences(expect));
      CHECK(enumerate_bruteforce(g, p) == as_occurrences(expect));
    }
  }
}

TEST_CASE("dense and sparse extremes against the oracle") {
  std::mt19937_64 rng(13);
  for (double p : {0.05, 0.95}) {
    for (int t = 0; t < 5; ++t) {
      const Graph g = oracle::random_graph(14, p, rng);
      for (Pattern h : kAllPatterns) CHECK(count_induced(g, h) == oracle::count(g, h));
    }
  }
}

TEST_CASE("SBM-sized graphs against the library brute force") {
  std::mt19937_64 rng(14);
  const std::vector<int> sizes{10, 10, 10};
  const std::vector<double> p_in{0.2, 0.3, 0.4};
  for (int t = 0; t < 3; ++t) {
    const Graph g = gen_sbm(sizes, p_in, 0.1, rng);
    const CountVector all = count_all(g);
    for (Pattern h : kAllPatterns) CHECK(all[h] == count_bruteforce(g, h));
  }
}

TEST_CASE("enumerated occurrences induce the pattern") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 20; ++t) {
    const Graph g = oracle::random_graph(9, 0.5, rng);
    for (Pattern h : kAllPatterns) {
      const auto occ = enumerate_induced(g, h);
      CHECK(std::is_sorted(occ.begin(), occ.end()));
      for (const auto& s : occ) {
        CHECK(static_cast<int>(s.size()) == info(h).size);
        CHECK(is_isomorphic_small(induced_subgraph(g, s), pattern_graph(h)));
      }
    }
  }
}

TEST_CASE("one toggle changes any count by at most C(n-2,1)+C(n-2,2)") {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 100; ++t) {
    const int n = 4 + static_cast<int>(rng() % 9);
    const Graph g = oracle::random_graph(n, 0.4, rng);
    const Node i = static_cast<Node>(rng() % n);
    const Node j = static_cast<Node>((i + 1 + rng() % (n - 1)) % n);
    const CountVector before = count_all(g);
    const CountVector after = count_all(edge_flip(g, i, j));
    for (Pattern h : kAllPatterns) {
      const Count bound = (n - 2) + (n - 2) * (n - 3) / 2;
      CHECK(std::abs(after[h] - before[h]) <= bound);
    }
  }
}

TEST_CASE("four-node classification") {
  CHECK(classify_four(0b111111) == Pattern::FourClique);
  CHECK(classify_four(0) == std::nullopt);
  // 01, 12, 23 form a 3-path.
  CHECK(classify_four(0b001 | 0b001000 | 0b100000) == Pattern::ThreePath);
  // Triangle 0-1-2 plus isolated node 3 is not connected.
  CHECK(classify_four(0b001 | 0b010 | 0b001000) == std::nullopt);
  for (unsigned mask = 0; mask < 64; ++mask) {
    std::vector<NodePair> edges;
    const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int b = 0; b < 6; ++b)
      if (mask >> b & 1U) edges.emplace_back(pairs[b][0], pairs[b][1]);
    const int expect = oracle::classify(Graph(4, edges), {0, 1, 2, 3});
    const auto got = classify_four(mask);
    CHECK((got ? static_cast<int>(*got) : -1) == expect);
  }
}
