// SPDX-License-Identifier: Apache-2.0
#include "steiner/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "steiner/error.hpp"

namespace steiner {

struct Expression::Node {
  enum class Kind { Number, Var, Unary, Binary, Call } kind = Kind::Number;
  double value = 0.0;
  int var = 0;  // 0 x1, 1 x2, 2 y, 3 r
  char op = 0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const double* v) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Var: return v[var];
      case Kind::Unary: return -args[0]->eval(v);
      case Kind::Binary: {
        const double a = args[0]->eval(v);
        const double b = args[1]->eval(v);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
        }
      }
      case Kind::Call:
        return fn2 ? fn2(args[0]->eval(v), args[1]->eval(v)) : fn1(args[0]->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

double step_fn(double t) { return t >= 0.0 ? 1.0 : 0.0; }
double min_fn(double a, double b) { return std::min(a, b); }
double max_fn(double a, double b) { return std::max(a, b); }

const std::map<std::string, double (*)(double)>& unary_functions() {
  static const std::map<std::string, double (*)(double)> table = {
      {"sin", [](double t) { return std::sin(t); }},   {"cos", [](double t) { return std::cos(t); }},
      {"tan", [](double t) { return std::tan(t); }},   {"exp", [](double t) { return std::exp(t); }},
      {"log", [](double t) { return std::log(t); }},   {"sqrt", [](double t) { return std::sqrt(t); }},
      {"abs", [](double t) { return std::abs(t); }},   {"tanh", [](double t) { return std::tanh(t); }},
      {"sinh", [](double t) { return std::sinh(t); }}, {"cosh", [](double t) { return std::cosh(t); }},
      {"floor", [](double t) { return std::floor(t); }}, {"step", step_fn},
  };
  return table;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse_all() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidArgument("expression: " + msg + " at column " + std::to_string(pos_ + 1));
  }
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

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+')) lhs = binary('+', lhs, term());
      else if (eat('-')) lhs = binary('-', lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*')) lhs = binary('*', lhs, unary());
      else if (eat('/')) lhs = binary('/', lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (eat('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->args = {unary()};
      return n;
    }
    if (eat('+')) return unary();
    return power();
  }
  // Right associative; binds tighter than unary minus on its left (-x^2 = -(x^2)).
  NodePtr power() {
    auto base = primary();
    if (eat('^')) return binary('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = s_.data() + pos_;
      auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - first);
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Node>();
      if (name == "x" || name == "x1" || name == "x2" || name == "y" || name == "r") {
        n->kind = Node::Kind::Var;
        n->var = name == "x2" ? 1 : name == "y" ? 2 : name == "r" ? 3 : 0;
        return n;
      }
      if (name == "pi") {
        n->value = std::numbers::pi;
        return n;
      }
      if (name == "e") {
        n->value = std::numbers::e;
        return n;
      }
      n->kind = Node::Kind::Call;
      if (name == "min" || name == "max") {
        n->fn2 = name == "min" ? min_fn : max_fn;
        if (!eat('(')) fail("expected '(' after " + name);
        auto a = expr();
        if (!eat(',')) fail("expected ',' in " + name);
        auto b = expr();
        if (!eat(')')) fail("expected ')'");
        n->args = {a, b};
        return n;
      }
      const auto& fns = unary_functions();
      const auto it = fns.find(name);
      if (it == fns.end()) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      n->fn1 = it->second;
      if (!eat('(')) fail("expected '(' after " + name);
      n->args = {expr()};
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse_all();
  return e;
}

double Expression::operator()(double x1, double x2, double y) const {
  const double v[4] = {x1, x2, y, std::hypot(x1, x2)};
  return root_->eval(v);
}

}  // namespace steiner
