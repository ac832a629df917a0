#pragma once

// Small expression language for closed-form symbols a(x, xi):
//
//   numbers, pi, x0 x1 x2, xi0 xi1 xi2 (x and xi alias x0 and xi0),
//   jb(xi) = <xi>, sin cos exp sqrt abs, + - * / ^, parentheses.
//
// `^` is right-associative and binds tighter than unary minus.

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace sobscale {

class SymbolExpr {
 public:
  /// Throws std::invalid_argument with the offending position on syntax errors.
  static SymbolExpr parse(const std::string& text);

  double eval(const std::array<double, 3>& x, const std::array<double, 3>& xi) const;
  const std::string& text() const { return text_; }
  /// 1 + largest coordinate index referenced by the expression (0 if none).
  int min_dimension() const { return min_dim_; }
  bool depends_on_x() const { return uses_x_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = 0;
  int min_dim_ = 0;
  bool uses_x_ = false;
};

struct SymbolExpr::Node {
  enum class Op {
    constant,
    x,
    xi,
    bracket,
    neg,
    add,
    sub,
    mul,
    div,
    pow,
    sin,
    cos,
    exp,
    sqrt,
    abs,
  };
  Op op = Op::constant;
  double value = 0.0;  // constant
  int index = 0;       // coordinate index for x / xi
  int lhs = -1;
  int rhs = -1;
};

}  // namespace sobscale
