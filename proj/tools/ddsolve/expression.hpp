#pragma once

#include <memory>
#include <string>

namespace ddsolve {

/// Arithmetic over x and y: + - * / ^, unary minus, parentheses, numbers
/// and the functions sin, cos, exp.
class Expression {
 public:
  explicit Expression(const std::string& text);
  double operator()(double x, double y) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ddsolve
