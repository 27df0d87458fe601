#include "bnuq/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "bnuq/error.hpp"

namespace bnuq {

DirectedGraph::DirectedGraph(std::size_t vertex_count)
    : parents_(vertex_count), children_(vertex_count) {}

DirectedGraph::DirectedGraph(std::vector<std::vector<Vertex>> parents,
                             std::vector<std::string> labels)
    : parents_(std::move(parents)), labels_(std::move(labels)) {
  const std::size_t n = parents_.size();
  if (!labels_.empty() && labels_.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "label count does not match vertex count");
  }
  children_.assign(n, {});
  for (Vertex v = 0; v < n; ++v) {
    std::set<Vertex> seen;
    for (Vertex p : parents_[v]) {
      if (p >= n) {
        throw Error(ErrorCode::InvalidVertex,
                    "edge endpoint " + std::to_string(p) + " out of range");
      }
      if (p == v) {
        Error e(ErrorCode::CycleDetected, "self loop at vertex " + label(v));
        e.cycle = {v, v};
        throw e;
      }
      if (!seen.insert(p).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate parent for vertex " + label(v));
      }
      children_[p].push_back(v);
    }
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  topological_order(*this);
}

DirectedGraph DirectedGraph::from_edges(std::size_t vertex_count,
                                        const std::vector<std::pair<Vertex, Vertex>>& edges,
                                        std::vector<std::string> labels) {
  std::vector<std::vector<Vertex>> parents(vertex_count);
  for (const auto& [from, to] : edges) {
    if (from >= vertex_count || to >= vertex_count) {
      throw Error(ErrorCode::InvalidVertex, "edge endpoint out of range");
    }
    parents[to].push_back(from);
  }
  for (auto& p : parents) std::sort(p.begin(), p.end());
  return DirectedGraph(std::move(parents), std::move(labels));
}

void DirectedGraph::check_vertex(Vertex v) const {
  if (v >= vertex_count()) {
    throw Error(ErrorCode::InvalidVertex, "vertex " + std::to_string(v) + " out of range");
  }
}

const std::vector<Vertex>& DirectedGraph::parents(Vertex v) const {
  check_vertex(v);
  return parents_[v];
}

const std::vector<Vertex>& DirectedGraph::children(Vertex v) const {
  check_vertex(v);
  return children_[v];
}

std::vector<std::pair<Vertex, Vertex>> DirectedGraph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (Vertex v = 0; v < vertex_count(); ++v) {
    for (Vertex p : parents_[v]) out.emplace_back(p, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool DirectedGraph::has_edge(Vertex from, Vertex to) const {
  const auto& p = parents(to);
  return std::find(p.begin(), p.end(), from) != p.end();
}

std::string DirectedGraph::label(Vertex v) const {
  if (v < labels_.size()) return labels_[v];
  return std::to_string(v);
}

Vertex DirectedGraph::find(const std::string& name) const {
  for (Vertex v = 0; v < labels_.size(); ++v) {
    if (labels_[v] == name) return v;
  }
  throw Error(ErrorCode::InvalidVertex, "unknown vertex '" + name + "'");
}

namespace {

std::vector<Vertex> find_cycle(const DirectedGraph& graph, const std::vector<int>& remaining) {
  // Walk parents inside the unresolved subgraph until a vertex repeats.
  const std::size_t n = graph.vertex_count();
  Vertex start = 0;
  while (start < n && remaining[start] == 0) ++start;
  std::vector<int> pos(n, -1);
  std::vector<Vertex> walk;
  Vertex v = start;
  while (pos[v] < 0) {
    pos[v] = static_cast<int>(walk.size());
    walk.push_back(v);
    for (Vertex p : graph.parents(v)) {
      if (remaining[p] > 0) {
        v = p;
        break;
      }
    }
  }
  std::vector<Vertex> cycle(walk.begin() + pos[v], walk.end());
  std::reverse(cycle.begin(), cycle.end());
  cycle.push_back(cycle.front());
  return cycle;
}

}  // namespace

std::vector<Vertex> topological_order(const DirectedGraph& graph) {
  const std::size_t n = graph.vertex_count();
  std::vector<int> indegree(n);
  std::priority_queue<Vertex, std::vector<Vertex>, std::greater<>> ready;
  for (Vertex v = 0; v < n; ++v) {
    indegree[v] = static_cast<int>(graph.parents(v).size());
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<Vertex> order;
  order.reserve(n);
  while (!ready.empty()) {
    const Vertex v = ready.top();
    ready.pop();
    order.push_back(v);
    for (Vertex c : graph.children(v)) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    const auto cycle = find_cycle(graph, indegree);
    std::string msg = "graph contains a cycle:";
    for (Vertex v : cycle) msg += " " + graph.label(v);
    Error e(ErrorCode::CycleDetected, msg);
    e.cycle = cycle;
    throw e;
  }
  return order;
}

std::vector<Vertex> ancestors(const DirectedGraph& graph, Vertex k) {
  graph.check_vertex(k);
  std::vector<char> mark(graph.vertex_count(), 0);
  std::vector<Vertex> stack(graph.parents(k).begin(), graph.parents(k).end());
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (Vertex p : graph.parents(v)) stack.push_back(p);
  }
  std::vector<Vertex> out;
  for (Vertex v = 0; v < mark.size(); ++v) {
    if (mark[v]) out.push_back(v);
  }
  return out;
}

std::vector<Vertex> ancestors_closed(const DirectedGraph& graph, Vertex k) {
  auto out = ancestors(graph, k);
  out.insert(std::upper_bound(out.begin(), out.end(), k), k);
  return out;
}

std::vector<Vertex> descendants(const DirectedGraph& graph, Vertex k) {
  graph.check_vertex(k);
  std::vector<char> mark(graph.vertex_count(), 0);
  std::vector<Vertex> stack(graph.children(k).begin(), graph.children(k).end());
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (Vertex c : graph.children(v)) stack.push_back(c);
  }
  std::vector<Vertex> out;
  for (Vertex v = 0; v < mark.size(); ++v) {
    if (mark[v]) out.push_back(v);
  }
  return out;
}

bool cond_indep_given_parents(const DirectedGraph& graph, Vertex k, Vertex l) {
  graph.check_vertex(k);
  graph.check_vertex(l);
  const auto closed = ancestors_closed(graph, k);
  if (!std::binary_search(closed.begin(), closed.end(), l)) {
    throw Error(ErrorCode::NotAncestor,
                "vertex " + graph.label(l) + " is not in the ancestor closure of " + graph.label(k));
  }
  const std::size_t n = graph.vertex_count();
  std::vector<char> blocked(n, 0);
  blocked[l] = 1;
  for (Vertex p : graph.parents(l)) blocked[p] = 1;
  // Forward search from rho_l \ pi_l through unblocked vertices.
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack;
  for (Vertex a : ancestors(graph, l)) {
    if (!blocked[a]) stack.push_back(a);
  }
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    if (v == k) return false;
    for (Vertex c : graph.children(v)) {
      if (!blocked[c]) stack.push_back(c);
    }
  }
  return true;
}

std::vector<std::vector<Vertex>> directed_paths(const DirectedGraph& graph, Vertex from, Vertex to,
                                                std::size_t limit) {
  graph.check_vertex(from);
  graph.check_vertex(to);
  std::vector<std::vector<Vertex>> out;
  std::vector<Vertex> path{from};
  std::function<void(Vertex)> walk = [&](Vertex v) {
    if (out.size() >= limit) return;
    if (v == to) {
      out.push_back(path);
      return;
    }
    for (Vertex c : graph.children(v)) {
      path.push_back(c);
      walk(c);
      path.pop_back();
    }
  };
  walk(from);
  return out;
}

}  // namespace bnuq
