// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/expr.hpp
//! Closed-form coefficient expressions over (x, t): a minimal recursive-descent
//! grammar with literals, + - * / ^, parentheses, unary minus, and the
//! functions sin, cos, exp, plus the constants pi and the variables x, t.

#ifndef PPLOG_EXPR_HPP
#define PPLOG_EXPR_HPP

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pplog {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

enum class NodeOp : unsigned char {
  Literal, VarX, VarT, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp
};

struct ExprNode {
  NodeOp op;
  double value = 0.0;          // Literal only
  int lhs = -1, rhs = -1;      // indices into the arena
};

}  // namespace detail

//! Immutable parsed expression; evaluation walks a flat node arena.
class Expr {
 public:
  Expr() : Expr(0.0) {}

  static Expr constant(double v) { return Expr(v); }

  //! Parse an expression string. `line` is used in error messages.
  static Expr parse(const std::string& text, int line = 0);

  double eval(double x, double t) const { return eval_node(root_, x, t); }

  //! Canonical text form; re-parsing it yields an identical tree.
  std::string to_string() const { return print_node(root_, 0); }

  bool operator==(const Expr& other) const { return to_string() == other.to_string(); }

 private:
  explicit Expr(double v) {
    nodes_.push_back({detail::NodeOp::Literal, v, -1, -1});
    root_ = 0;
  }
  Expr(std::vector<detail::ExprNode> nodes, int root)
      : nodes_(std::move(nodes)), root_(root) {}

  double eval_node(int i, double x, double t) const {
    using detail::NodeOp;
    const auto& n = nodes_[i];
    switch (n.op) {
      case NodeOp::Literal: return n.value;
      case NodeOp::VarX: return x;
      case NodeOp::VarT: return t;
      case NodeOp::Add: return eval_node(n.lhs, x, t) + eval_node(n.rhs, x, t);
      case NodeOp::Sub: return eval_node(n.lhs, x, t) - eval_node(n.rhs, x, t);
      case NodeOp::Mul: return eval_node(n.lhs, x, t) * eval_node(n.rhs, x, t);
      case NodeOp::Div: return eval_node(n.lhs, x, t) / eval_node(n.rhs, x, t);
      case NodeOp::Pow: return std::pow(eval_node(n.lhs, x, t), eval_node(n.rhs, x, t));
      case NodeOp::Neg: return -eval_node(n.lhs, x, t);
      case NodeOp::Sin: return std::sin(eval_node(n.lhs, x, t));
      case NodeOp::Cos: return std::cos(eval_node(n.lhs, x, t));
      case NodeOp::Exp: return std::exp(eval_node(n.lhs, x, t));
    }
    return 0.0;
  }

  std::string print_node(int i, int parent_prec) const;

  std::vector<detail::ExprNode> nodes_;
  int root_ = 0;

  friend class ExprParser;
};

class ExprParser {
 public:
  ExprParser(const std::string& s, int line) : s_(s), line_(line) {}

  Expr run() {
    int root = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input '" + s_.substr(pos_) + "'");
    return Expr(std::move(nodes_), root);
  }

 private:
  using NodeOp = detail::NodeOp;

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("expression error: " + msg, line_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
    return false;
  }

  int make(NodeOp op, int lhs = -1, int rhs = -1, double v = 0.0) {
    nodes_.push_back({op, v, lhs, rhs});
    return static_cast<int>(nodes_.size()) - 1;
  }

  // expr := term (('+'|'-') term)*
  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) lhs = make(NodeOp::Add, lhs, parse_term());
      else if (eat('-')) lhs = make(NodeOp::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  // term := unary (('*'|'/') unary)*
  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (eat('*')) lhs = make(NodeOp::Mul, lhs, parse_unary());
      else if (eat('/')) lhs = make(NodeOp::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  // unary := '-' unary | power
  int parse_unary() {
    if (eat('-')) return make(NodeOp::Neg, parse_unary());
    return parse_power();
  }

  // power := primary ('^' unary)?   (right associative)
  int parse_power() {
    int base = parse_primary();
    if (eat('^')) return make(NodeOp::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      int e = parse_expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    // exponent suffix: 1e-3, 2.5E+4
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    try {
      return make(NodeOp::Literal, -1, -1, std::stod(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      fail("bad numeric literal '" + s_.substr(start, pos_ - start) + "'");
    }
  }

  int parse_ident() {
    size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string id = s_.substr(start, pos_ - start);
    if (id == "x") return make(NodeOp::VarX);
    if (id == "t") return make(NodeOp::VarT);
    if (id == "pi") return make(NodeOp::Literal, -1, -1, M_PI);
    NodeOp fn;
    if (id == "sin") fn = NodeOp::Sin;
    else if (id == "cos") fn = NodeOp::Cos;
    else if (id == "exp") fn = NodeOp::Exp;
    else fail("unknown identifier '" + id + "'");
    if (!eat('(')) fail("expected '(' after '" + id + "'");
    int arg = parse_expr();
    if (!eat(')')) fail("missing ')' after argument of '" + id + "'");
    return make(fn, arg);
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_;
  std::vector<detail::ExprNode> nodes_;
};

inline Expr Expr::parse(const std::string& text, int line) {
  return ExprParser(text, line).run();
}

inline std::string Expr::print_node(int i, int parent_prec) const {
  using detail::NodeOp;
  const auto& n = nodes_[i];
  auto wrap = [&](const std::string& s, int prec) {
    return prec < parent_prec ? "(" + s + ")" : s;
  };
  switch (n.op) {
    case NodeOp::Literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      std::string s(buf);
      return n.value < 0 ? wrap(s, 2) : s;
    }
    case NodeOp::VarX: return "x";
    case NodeOp::VarT: return "t";
    case NodeOp::Add: return wrap(print_node(n.lhs, 1) + " + " + print_node(n.rhs, 2), 1);
    case NodeOp::Sub: return wrap(print_node(n.lhs, 1) + " - " + print_node(n.rhs, 2), 1);
    case NodeOp::Mul: return wrap(print_node(n.lhs, 3) + "*" + print_node(n.rhs, 4), 3);
    case NodeOp::Div: return wrap(print_node(n.lhs, 3) + "/" + print_node(n.rhs, 4), 3);
    case NodeOp::Neg: return wrap("-" + print_node(n.lhs, 5), 2);
    case NodeOp::Pow: return wrap(print_node(n.lhs, 7) + "^" + print_node(n.rhs, 6), 6);
    case NodeOp::Sin: return "sin(" + print_node(n.lhs, 0) + ")";
    case NodeOp::Cos: return "cos(" + print_node(n.lhs, 0) + ")";
    case NodeOp::Exp: return "exp(" + print_node(n.lhs, 0) + ")";
  }
  return {};
}

}  // namespace pplog

#endif
