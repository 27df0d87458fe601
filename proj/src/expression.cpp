#include "bnuq/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "bnuq/error.hpp"

namespace bnuq {

struct Expression::Node {
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Abs, Min, Max };
  Kind kind = Kind::Number;
  double value = 0.0;
  std::size_t slot = 0;
  std::vector<std::unique_ptr<Node>> args;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;

std::unique_ptr<Node> make(Kind kind, std::unique_ptr<Node> a, std::unique_ptr<Node> b = nullptr) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->args.push_back(std::move(a));
  if (b) n->args.push_back(std::move(b));
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, std::vector<std::string>& variables)
      : text_(text), variables_(variables) {}

  std::unique_ptr<Node> parse() {
    auto root = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected character");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::SyntaxError) {
    throw Error(code, what + " at offset " + std::to_string(pos_), pos_);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = make(Kind::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::Mul, std::move(lhs), factor());
      } else if (accept('/')) {
        lhs = make(Kind::Div, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> factor() {
    auto base = unary();
    if (accept('^')) return make(Kind::Pow, std::move(base), factor());
    return base;
  }

  std::unique_ptr<Node> unary() {
    if (accept('-')) return make(Kind::Negate, atom());
    return atom();
  }

  std::unique_ptr<Node> atom() {
    skip();
    if (pos_ >= text_.size()) fail("expected operand");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("expected operand");
  }

  std::unique_ptr<Node> number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    auto n = std::make_unique<Node>();
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, n->value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return n;
  }

  std::unique_ptr<Node> identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      std::vector<std::unique_ptr<Node>> args;
      if (!accept(')')) {
        args.push_back(expr());
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) fail("expected ')' or ','");
      }
      return call(name, start, std::move(args));
    }
    auto n = std::make_unique<Node>();
    n->kind = Kind::Variable;
    auto it = std::find(variables_.begin(), variables_.end(), name);
    n->slot = static_cast<std::size_t>(it - variables_.begin());
    if (it == variables_.end()) variables_.push_back(name);
    return n;
  }

  std::unique_ptr<Node> call(const std::string& name, std::size_t where,
                             std::vector<std::unique_ptr<Node>> args) {
    struct Fn {
      const char* name;
      Kind kind;
      std::size_t arity;
    };
    static constexpr Fn table[] = {{"exp", Kind::Exp, 1},  {"log", Kind::Log, 1},
                                   {"sqrt", Kind::Sqrt, 1}, {"abs", Kind::Abs, 1},
                                   {"min", Kind::Min, 2},  {"max", Kind::Max, 2}};
    for (const auto& fn : table) {
      if (name == fn.name) {
        if (args.size() != fn.arity) {
          throw Error(ErrorCode::ArityError,
                      name + " expects " + std::to_string(fn.arity) + " argument(s), got " +
                          std::to_string(args.size()) + " at offset " + std::to_string(where),
                      where);
        }
        auto n = std::make_unique<Node>();
        n->kind = fn.kind;
        n->args = std::move(args);
        return n;
      }
    }
    throw Error(ErrorCode::UnknownFunction,
                "unknown function '" + name + "' at offset " + std::to_string(where), where);
  }

  std::string_view text_;
  std::vector<std::string>& variables_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, std::span<const double> values) {
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Variable: return values[n.slot];
    case Kind::Negate: return -eval(*n.args[0], values);
    case Kind::Add: return eval(*n.args[0], values) + eval(*n.args[1], values);
    case Kind::Sub: return eval(*n.args[0], values) - eval(*n.args[1], values);
    case Kind::Mul: return eval(*n.args[0], values) * eval(*n.args[1], values);
    case Kind::Div: return eval(*n.args[0], values) / eval(*n.args[1], values);
    case Kind::Pow: return std::pow(eval(*n.args[0], values), eval(*n.args[1], values));
    case Kind::Exp: return std::exp(eval(*n.args[0], values));
    case Kind::Log: return std::log(eval(*n.args[0], values));
    case Kind::Sqrt: return std::sqrt(eval(*n.args[0], values));
    case Kind::Abs: return std::fabs(eval(*n.args[0], values));
    case Kind::Min: return std::fmin(eval(*n.args[0], values), eval(*n.args[1], values));
    case Kind::Max: return std::fmax(eval(*n.args[0], values), eval(*n.args[1], values));
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  Parser parser(text, e.variables_);
  e.root_ = parser.parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::evaluate(std::span<const double> values) const {
  if (!root_) throw Error(ErrorCode::InvalidArgument, "empty expression");
  if (values.size() < variables_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expression needs " +
                                                  std::to_string(variables_.size()) + " values");
  }
  return eval(*root_, values);
}

}  // namespace bnuq
