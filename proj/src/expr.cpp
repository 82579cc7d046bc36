#include "ringmod/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "ringmod/error.hpp"

namespace ringmod {

namespace {

enum class Op {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Tanh,
};

}  // namespace

struct Expr::Node {
  Op op;
  double value = 0.0;  // Constant
  int index = 0;       // Variable
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& variables)
      : text_(text), vars_(variables) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip_space();
    if (pos_ != text_.size())
      fail(ErrorCode::ParseError, "unexpected trailing input at position " +
                                      std::to_string(pos_) + " in '" + text_ + "'");
    return e;
  }

 private:
  NodePtr sum() {
    NodePtr lhs = term();
    for (;;) {
      skip_space();
      if (consume('+'))
        lhs = make_node(Op::Add, lhs, term());
      else if (consume('-'))
        lhs = make_node(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      if (consume('*'))
        lhs = make_node(Op::Mul, lhs, unary());
      else if (consume('/'))
        lhs = make_node(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    skip_space();
    if (consume('-')) return make_node(Op::Neg, unary());
    if (consume('+')) return unary();
    return power();
  }

  // Right-associative: a^b^c = a^(b^c). The exponent binds a unary so -x^2
  // parses as -(x^2) and 2^-1 works.
  NodePtr power() {
    NodePtr base = atom();
    skip_space();
    if (consume('^')) return make_node(Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip_space();
    if (pos_ >= text_.size()) fail(ErrorCode::ParseError, "unexpected end of expression '" + text_ + "'");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = sum();
      skip_space();
      if (!consume(')')) fail(ErrorCode::ParseError, "missing ')' in '" + text_ + "'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(ErrorCode::ParseError, std::string("unexpected character '") + c + "' in '" + text_ + "'");
  }

  NodePtr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail(ErrorCode::ParseError, "bad number in '" + text_ + "'");
    pos_ += static_cast<size_t>(end - begin);
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Constant;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);

    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      NodePtr arg = sum();
      skip_space();
      if (!consume(')')) fail(ErrorCode::ParseError, "missing ')' after " + name + "(...)");
      if (name == "sin") return make_node(Op::Sin, arg);
      if (name == "cos") return make_node(Op::Cos, arg);
      if (name == "exp") return make_node(Op::Exp, arg);
      if (name == "log") return make_node(Op::Log, arg);
      if (name == "sqrt") return make_node(Op::Sqrt, arg);
      if (name == "tanh") return make_node(Op::Tanh, arg);
      fail(ErrorCode::ParseError, "unknown function '" + name + "'");
    }

    if (name == "pi") {
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Constant;
      n->value = M_PI;
      return n;
    }
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::Variable;
        n->index = static_cast<int>(i);
        return n;
      }
    }
    fail(ErrorCode::ParseError, "unknown variable '" + name + "' in '" + text_ + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
};

bool node_has_variable(const Expr::Node& n) {
  if (n.op == Op::Variable) return true;
  if (n.a && node_has_variable(*n.a)) return true;
  if (n.b && node_has_variable(*n.b)) return true;
  return false;
}

double eval_node(const Expr::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::Constant: return n.value;
    case Op::Variable: return v[static_cast<size_t>(n.index)];
    case Op::Add: return eval_node(*n.a, v) + eval_node(*n.b, v);
    case Op::Sub: return eval_node(*n.a, v) - eval_node(*n.b, v);
    case Op::Mul: return eval_node(*n.a, v) * eval_node(*n.b, v);
    case Op::Div: return eval_node(*n.a, v) / eval_node(*n.b, v);
    case Op::Pow: return std::pow(eval_node(*n.a, v), eval_node(*n.b, v));
    case Op::Neg: return -eval_node(*n.a, v);
    case Op::Sin: return std::sin(eval_node(*n.a, v));
    case Op::Cos: return std::cos(eval_node(*n.a, v));
    case Op::Exp: return std::exp(eval_node(*n.a, v));
    case Op::Log: return std::log(eval_node(*n.a, v));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, v));
    case Op::Tanh: return std::tanh(eval_node(*n.a, v));
  }
  fail(ErrorCode::Internal, "corrupt expression node");
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
  Parser parser(text, variables);
  Expr e;
  e.root_ = parser.parse();
  e.text_ = text;
  e.n_vars_ = static_cast<int>(variables.size());
  return e;
}

bool Expr::is_constant() const {
  return root_ == nullptr || !node_has_variable(*root_);
}

double Expr::eval(std::span<const double> values) const {
  require(root_ != nullptr, ErrorCode::Internal, "evaluating empty expression");
  require(static_cast<int>(values.size()) >= n_vars_, ErrorCode::InvalidArgument,
          "expression expects " + std::to_string(n_vars_) + " variables");
  return eval_node(*root_, values);
}

}  // namespace ringmod
