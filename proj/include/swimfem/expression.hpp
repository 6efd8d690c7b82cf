#pragma once

#include <memory>
#include <string>

namespace swimfem {

/// Arithmetic expression over the variables t, x and y.
///
/// Grammar: numbers, t, x, y, pi, the functions sin, cos and abs, the binary
/// operators + - * / with the usual precedence, unary minus and parentheses.
class Expression {
 public:
  struct Node;

  Expression();
  /// Throws ValidationError with the character position of the problem.
  static Expression parse(const std::string& text);

  double operator()(double t, double x, double y) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace swimfem
