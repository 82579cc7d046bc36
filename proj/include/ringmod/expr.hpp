#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ringmod {

// Arithmetic expression over named variables.
// Operators: + - * / ^ (right-assoc power), unary +/-.
// Functions: sin cos exp log sqrt tanh. Constant: pi.
class Expr {
 public:
  Expr() = default;

  // Parses `text` against the given variable names (e.g. {"x1","x2"} or {"r"}).
  // Throws Error(ParseError) on malformed input or unknown identifiers.
  static Expr parse(const std::string& text, const std::vector<std::string>& variables);

  double eval(std::span<const double> values) const;

  // True when no variable occurs in the parsed tree.
  bool is_constant() const;

  bool empty() const { return root_ == nullptr; }
  const std::string& text() const { return text_; }
  int variable_count() const { return n_vars_; }

  struct Node;  // exposed for the parser implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int n_vars_ = 0;
};

}  // namespace ringmod
