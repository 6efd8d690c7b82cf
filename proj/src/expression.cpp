#include "swimfem/expression.hpp"

#include "swimfem/errors.hpp"
#include "swimfem/geometry.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace swimfem {

struct Expression::Node {
  enum class Op { Const, T, X, Y, Add, Sub, Mul, Div, Neg, Sin, Cos, Abs } op = Op::Const;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double t, double x, double y) const {
    switch (op) {
      case Op::Const: return value;
      case Op::T: return t;
      case Op::X: return x;
      case Op::Y: return y;
      case Op::Add: return a->eval(t, x, y) + b->eval(t, x, y);
      case Op::Sub: return a->eval(t, x, y) - b->eval(t, x, y);
      case Op::Mul: return a->eval(t, x, y) * b->eval(t, x, y);
      case Op::Div: return a->eval(t, x, y) / b->eval(t, x, y);
      case Op::Neg: return -a->eval(t, x, y);
      case Op::Sin: return std::sin(a->eval(t, x, y));
      case Op::Cos: return std::cos(a->eval(t, x, y));
      case Op::Abs: return std::abs(a->eval(t, x, y));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = value;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("expression \"" + s_ + "\": " + msg + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+'))
        n = make(Op::Add, n, product());
      else if (accept('-'))
        n = make(Op::Sub, n, product());
      else
        return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = make(Op::Mul, n, unary());
      else if (accept('/'))
        n = make(Op::Div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "t") return make(Op::T);
      if (id == "x") return make(Op::X);
      if (id == "y") return make(Op::Y);
      if (id == "pi") return make(Op::Const, nullptr, nullptr, kPi);
      Op f;
      if (id == "sin")
        f = Op::Sin;
      else if (id == "cos")
        f = Op::Cos;
      else if (id == "abs")
        f = Op::Abs;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr arg = sum();
      if (!accept(')')) fail("expected ')'");
      return make(f, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto r = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (r.ec != std::errc() || r.ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make(Op::Const, nullptr, nullptr, v);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make(Op::Const)), text_("0") {}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(double t, double x, double y) const { return root_->eval(t, x, y); }

}  // namespace swimfem
