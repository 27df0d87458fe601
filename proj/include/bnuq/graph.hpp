#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace bnuq {

using Vertex = std::size_t;

// DAG stored as per-vertex parent lists. Parent order is significant: CPD
// coefficients and parent value vectors follow it.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(std::size_t vertex_count);
  DirectedGraph(std::vector<std::vector<Vertex>> parents,
                std::vector<std::string> labels = {});

  static DirectedGraph from_edges(std::size_t vertex_count,
                                  const std::vector<std::pair<Vertex, Vertex>>& edges,
                                  std::vector<std::string> labels = {});

  std::size_t vertex_count() const { return parents_.size(); }
  const std::vector<Vertex>& parents(Vertex v) const;
  const std::vector<Vertex>& children(Vertex v) const;
  std::vector<std::pair<Vertex, Vertex>> edges() const;
  bool has_edge(Vertex from, Vertex to) const;

  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(Vertex v) const;
  // Vertex id by label; throws InvalidVertex.
  Vertex find(const std::string& label) const;

  void check_vertex(Vertex v) const;

 private:
  std::vector<std::vector<Vertex>> parents_;
  std::vector<std::vector<Vertex>> children_;
  std::vector<std::string> labels_;
};

// Kahn's algorithm with smallest-id-first tie-break. Throws CycleDetected
// with the offending cycle in Error::cycle.
std::vector<Vertex> topological_order(const DirectedGraph& graph);

// Sorted ascending; excludes k.
std::vector<Vertex> ancestors(const DirectedGraph& graph, Vertex k);
std::vector<Vertex> ancestors_closed(const DirectedGraph& graph, Vertex k);
std::vector<Vertex> descendants(const DirectedGraph& graph, Vertex k);

// X_k independent of X_{rho_l \ pi_l} given X_{pi_l}, by the structural
// criterion: every directed path from rho_l \ pi_l to k meets pi_l or l.
bool cond_indep_given_parents(const DirectedGraph& graph, Vertex k, Vertex l);

// All directed paths from `from` to `to`, at most `limit` of them.
std::vector<std::vector<Vertex>> directed_paths(const DirectedGraph& graph, Vertex from, Vertex to,
                                                std::size_t limit = 4096);

}  // namespace bnuq
