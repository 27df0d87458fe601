#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bnuq/expression.hpp"
#include "bnuq/graph.hpp"

namespace bnuq {

struct AffineQoi {
  Vertex vertex = 0;
  double slope = 1.0;
  double offset = 0.0;
};

struct ExpressionQoi {
  Expression expression;
  std::vector<Vertex> vertices;  // expression variable i -> vertex
};

// Crossing point, in the pivot's intercept, of the conditional-mean lines of
// `first` and `second` (the ORR optimal binding energy). Defined through
// expectations only, so it cannot be evaluated on a single sample.
struct CrossingQoi {
  Vertex first = 0;
  Vertex second = 0;
  Vertex pivot = 0;
};

class QuantityOfInterest {
 public:
  using Form = std::variant<AffineQoi, ExpressionQoi, CrossingQoi>;

  QuantityOfInterest() = default;
  QuantityOfInterest(Form form, std::string name = {}) : form_(std::move(form)), name_(std::move(name)) {}

  static QuantityOfInterest affine(Vertex k, double slope = 1.0, double offset = 0.0);
  // Binds expression variables to vertex labels of `graph`.
  static QuantityOfInterest expression(Expression expr, const DirectedGraph& graph);
  static QuantityOfInterest crossing(Vertex first, Vertex second, Vertex pivot);

  const Form& form() const { return form_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  const AffineQoi* as_affine() const { return std::get_if<AffineQoi>(&form_); }
  const CrossingQoi* as_crossing() const { return std::get_if<CrossingQoi>(&form_); }
  bool samplable() const { return !as_crossing(); }

  // The vertex set A, sorted.
  std::vector<Vertex> vertex_set() const;
  // f evaluated on a full sample row; throws UnsupportedQoI for crossings.
  double evaluate(std::span<const double> row) const;

 private:
  Form form_;
  std::string name_;
};

// Union of the ancestor closures of the QoI vertices, sorted.
std::vector<Vertex> qoi_ancestor_closure(const DirectedGraph& graph, const QuantityOfInterest& qoi);

}  // namespace bnuq
