#include "bnuq/qoi.hpp"

#include <algorithm>

#include "bnuq/error.hpp"

namespace bnuq {

QuantityOfInterest QuantityOfInterest::affine(Vertex k, double slope, double offset) {
  return QuantityOfInterest(AffineQoi{k, slope, offset});
}

QuantityOfInterest QuantityOfInterest::expression(Expression expr, const DirectedGraph& graph) {
  ExpressionQoi q;
  for (const auto& name : expr.variables()) q.vertices.push_back(graph.find(name));
  q.expression = std::move(expr);
  return QuantityOfInterest(std::move(q));
}

QuantityOfInterest QuantityOfInterest::crossing(Vertex first, Vertex second, Vertex pivot) {
  return QuantityOfInterest(CrossingQoi{first, second, pivot});
}

std::vector<Vertex> QuantityOfInterest::vertex_set() const {
  std::vector<Vertex> out;
  if (const auto* a = std::get_if<AffineQoi>(&form_)) {
    out = {a->vertex};
  } else if (const auto* e = std::get_if<ExpressionQoi>(&form_)) {
    out = e->vertices;
  } else {
    const auto& c = std::get<CrossingQoi>(form_);
    out = {c.first, c.second};
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double QuantityOfInterest::evaluate(std::span<const double> row) const {
  if (const auto* a = std::get_if<AffineQoi>(&form_)) {
    return a->slope * row[a->vertex] + a->offset;
  }
  if (const auto* e = std::get_if<ExpressionQoi>(&form_)) {
    double buf[16];
    std::vector<double> heap;
    double* vals = buf;
    if (e->vertices.size() > 16) {
      heap.resize(e->vertices.size());
      vals = heap.data();
    }
    for (std::size_t i = 0; i < e->vertices.size(); ++i) vals[i] = row[e->vertices[i]];
    return e->expression.evaluate(std::span<const double>(vals, e->vertices.size()));
  }
  throw Error(ErrorCode::UnsupportedQoI, "crossing QoI is defined through means, not samples");
}

std::vector<Vertex> qoi_ancestor_closure(const DirectedGraph& graph, const QuantityOfInterest& qoi) {
  std::vector<Vertex> out;
  for (Vertex a : qoi.vertex_set()) {
    const auto c = ancestors_closed(graph, a);
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace bnuq
