// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

namespace steiner {

/// Closed-form scalar expression in the variables x1 (alias x), x2, y and
/// r = |(x1, x2)|.  Supports + - * / ^, unary minus, parentheses, the
/// constants pi and e, and the functions sin cos tan exp log sqrt abs tanh
/// sinh cosh floor, min(a,b), max(a,b), step(t) (1 for t >= 0).
class Expression {
 public:
  /// Throws InvalidArgument with the offending column on a parse error.
  static Expression parse(const std::string& text);

  double operator()(double x1, double x2, double y) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace steiner
