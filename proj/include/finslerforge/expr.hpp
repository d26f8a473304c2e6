#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "finslerforge/chart.hpp"
#include "finslerforge/jet.hpp"

namespace finslerforge {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  int offset() const { return offset_; }

 private:
  int offset_;
};

/// Evaluation failure carrying the byte offset of the offending node in the
/// source formula (or -1 for programmatically built trees).
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, int offset)
      : std::runtime_error(offset >= 0 ? what + " (node at offset " + std::to_string(offset) + ")"
                                       : what),
        offset_(offset) {}
  int offset() const { return offset_; }

 private:
  int offset_;
};

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sqrt,
  Exp,
  Log,
  Sin,
  Cos,
  Add,
  Sub,
  Mul,
  Div,
  Pow
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op;
  double num = 0.0;   // Const value or Pow exponent
  int var = -1;       // coordinate index for Var
  int pos = -1;       // byte offset in the source text, -1 if synthetic
  ExprPtr a, b;
};

/// Immutable scalar expression over chart coordinates.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr root) : root_(std::move(root)) {}

  bool empty() const { return !root_; }
  const ExprPtr& root() const { return root_; }

  static Expr constant(double v);
  static Expr var(int coord_index);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr pow(Expr a, double e);

  friend Expr operator+(Expr a, Expr b) { return binary(Op::Add, std::move(a), std::move(b)); }
  friend Expr operator-(Expr a, Expr b) { return binary(Op::Sub, std::move(a), std::move(b)); }
  friend Expr operator*(Expr a, Expr b) { return binary(Op::Mul, std::move(a), std::move(b)); }
  friend Expr operator/(Expr a, Expr b) { return binary(Op::Div, std::move(a), std::move(b)); }

  bool same_structure(const Expr& o) const;

  /// Coordinate indices referenced by the tree.
  std::vector<int> variables() const;

  /// Largest total degree in the given coordinates if the tree is
  /// polynomial in them, -1 otherwise.
  int poly_degree_in(const std::vector<int>& coords) const;

 private:
  ExprPtr root_;
};

Expr parse_expr(const std::string& text, const Chart& chart);
std::string to_string(const Expr& e, const Chart& chart);

double eval(const Expr& e, const std::vector<double>& point);

/// Value and all mixed partials w.r.t. `wrt` up to `order` (0..4), exact to
/// floating-point rounding. `point` is indexed by chart coordinate.
Jet eval_jet(const Expr& e, const std::vector<double>& point, int order,
             const std::vector<int>& wrt);

/// Unrestricted-order variant for internal derivative chains.
Jet eval_jet_unchecked(const Expr& e, const std::vector<double>& point, int order,
                       const std::vector<int>& wrt);

/// Random expression trees for round-trip and AD-vs-FD property tests.
/// `polynomial` restricts to +,-,*,integer powers so finite differences
/// stay well conditioned.
Expr random_expr(std::mt19937& rng, const Chart& chart, int max_depth, bool polynomial);

}  // namespace finslerforge
