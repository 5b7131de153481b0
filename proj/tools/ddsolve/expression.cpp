#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <ddsplit/error.hpp>

namespace ddsolve {

struct Expression::Node {
  enum Kind { number, var_x, var_y, neg, add, sub, mul, div, pow, sin, cos, exp } kind;
  double value = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using N = Expression::Node;

NodePtr make(N::Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
  auto n = std::make_shared<N>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ddsplit::ConfigError("expression '" + s_ + "': " + what + " at offset " +
                               std::to_string(pos_));
  }

  NodePtr sum() {
    NodePtr l = product();
    for (;;) {
      if (eat('+')) l = make(N::add, l, product());
      else if (eat('-')) l = make(N::sub, l, product());
      else return l;
    }
  }
  NodePtr product() {
    NodePtr l = unary();
    for (;;) {
      if (eat('*')) l = make(N::mul, l, unary());
      else if (eat('/')) l = make(N::div, l, unary());
      else return l;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(N::neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  // Right associative; binds tighter than unary minus on its left.
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(N::pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(N::number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return make(N::var_x);
      if (name == "y") return make(N::var_y);
      N::Kind k;
      if (name == "sin") k = N::sin;
      else if (name == "cos") k = N::cos;
      else if (name == "exp") k = N::exp;
      else {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr arg = sum();
      if (!eat(')')) fail("missing ')'");
      return make(k, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const N& n, double x, double y) {
  switch (n.kind) {
    case N::number: return n.value;
    case N::var_x: return x;
    case N::var_y: return y;
    case N::neg: return -eval(*n.a, x, y);
    case N::add: return eval(*n.a, x, y) + eval(*n.b, x, y);
    case N::sub: return eval(*n.a, x, y) - eval(*n.b, x, y);
    case N::mul: return eval(*n.a, x, y) * eval(*n.b, x, y);
    case N::div: return eval(*n.a, x, y) / eval(*n.b, x, y);
    case N::pow: return std::pow(eval(*n.a, x, y), eval(*n.b, x, y));
    case N::sin: return std::sin(eval(*n.a, x, y));
    case N::cos: return std::cos(eval(*n.a, x, y));
    case N::exp: return std::exp(eval(*n.a, x, y));
  }
  return 0.0;
}

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(double x, double y) const { return eval(*root_, x, y); }

}  // namespace ddsolve
