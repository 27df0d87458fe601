#include <doctest.h>

#include <algorithm>
#include <set>

#include "bnuq/error.hpp"
#include "bnuq/graph.hpp"
#include "support.hpp"

using namespace bnuq;

namespace {

std::set<Vertex> brute_ancestors(const DirectedGraph& g, Vertex k) {
  std::set<Vertex> out;
  for (Vertex a = 0; a < g.vertex_count(); ++a) {
    if (a != k && !directed_paths(g, a, k).empty()) out.insert(a);
  }
  return out;
}

}  // namespace

TEST_CASE("topological order respects every edge and breaks ties by id") {
  const auto g = DirectedGraph::from_edges(4, {{2, 0}, {3, 1}, {0, 1}});
  const auto order = topological_order(g);
  CHECK(order == std::vector<Vertex>{2, 0, 3, 1});
}

TEST_CASE("cycles are reported with the offending path") {
  const testing::Parents parents{{2}, {0}, {1}};
  try {
    DirectedGraph{parents};
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    REQUIRE(e.cycle.size() == 4);
    CHECK(e.cycle.front() == e.cycle.back());
    for (std::size_t i = 0; i + 1 < e.cycle.size(); ++i) {
      const auto& ps = parents[e.cycle[i + 1]];
      CHECK(std::find(ps.begin(), ps.end(), e.cycle[i]) != ps.end());
    }
  }
  CHECK_THROWS_AS(DirectedGraph(testing::Parents{{0}}), Error);
}

TEST_CASE("graph construction rejects bad input") {
  CHECK_THROWS_AS(DirectedGraph(testing::Parents{{5}}), Error);
  CHECK_THROWS_AS(DirectedGraph(testing::Parents{{}, {0, 0}}), Error);
  CHECK_THROWS_AS(DirectedGraph({{}, {}}, {"a"}), Error);
  const DirectedGraph g({{}, {0}}, {"a", "b"});
  CHECK(g.find("b") == 1);
  CHECK_THROWS_AS(g.find("c"), Error);
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
}

TEST_CASE("ancestor sets agree with path enumeration on random DAGs") {
  testing::Rng rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const auto g = testing::random_dag(rng, 7, 0.35);
    for (Vertex k = 0; k < 7; ++k) {
      const auto a = ancestors(g, k);
      CHECK(std::set<Vertex>(a.begin(), a.end()) == brute_ancestors(g, k));
      CHECK(std::is_sorted(a.begin(), a.end()));
      for (Vertex d : descendants(g, k)) {
        const auto da = ancestors(g, d);
        CHECK(std::binary_search(da.begin(), da.end(), k));
      }
    }
  }
}

TEST_CASE("parents d-separate the ancestors in a chain but not with a bypass") {
  const auto chain = DirectedGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(cond_indep_given_parents(chain, 3, 2));
  CHECK(cond_indep_given_parents(chain, 3, 1));
  const auto bypass = DirectedGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(cond_indep_given_parents(bypass, 2, 1));
  const auto skip = DirectedGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  CHECK_FALSE(cond_indep_given_parents(skip, 3, 2));
  CHECK_THROWS_AS(cond_indep_given_parents(chain, 1, 3), Error);
}

TEST_CASE("directed paths are capped") {
  // Ladder with two routes per rung: 2^5 paths from 0 to the end.
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex r = 0; r < 5; ++r) {
    const Vertex base = 3 * r;
    edges.push_back({base, base + 1});
    edges.push_back({base, base + 2});
    edges.push_back({base + 1, base + 3});
    edges.push_back({base + 2, base + 3});
  }
  const auto g = DirectedGraph::from_edges(16, edges);
  CHECK(directed_paths(g, 0, 15).size() == 32);
  CHECK(directed_paths(g, 0, 15, 10).size() == 10);
}
