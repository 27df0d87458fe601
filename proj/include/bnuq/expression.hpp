#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnuq {

// Scalar arithmetic over named variables:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-'? atom
//   atom   := number | ident | ident '(' args ')' | '(' expr ')'
// with functions exp, log, sqrt, abs, min, max.
class Expression {
 public:
  struct Node;

  Expression() = default;

  // Throws SyntaxError (with offset), UnknownFunction or ArityError.
  static Expression parse(std::string_view text);

  // `values[i]` is the value of variables()[i].
  double evaluate(std::span<const double> values) const;

  // Free variables in order of first appearance.
  const std::vector<std::string>& variables() const { return variables_; }
  const std::string& text() const { return text_; }
  bool empty() const { return root_ == nullptr; }

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> variables_;
  std::string text_;
};

inline Expression parse_expression(std::string_view text) { return Expression::parse(text); }

}  // namespace bnuq
