#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "pcm/errors.hpp"

namespace pcm {

inline constexpr int kMaxJetOrder = 8;

// Derivative tower (f(x), f'(x), ..., f^(r)(x)) of an expression at a point.
struct Jet {
  int order = 0;
  std::array<double, kMaxJetOrder + 1> coeff{};

  double value() const { return coeff[0]; }
  double operator[](int j) const { return coeff[static_cast<std::size_t>(j)]; }
  double& operator[](int j) { return coeff[static_cast<std::size_t>(j)]; }

  // Seed for the identity function at x: (x, 1, 0, ...).
  static Jet variable(double x, int order);
  static Jet constant(double v, int order);
};

enum class ExprKind {
  Number,
  Variable,  // the single variable "x"
  ConstPi,
  ConstE,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent, |exponent| <= 64
  Neg,
  Sin,
  Cos,
  Exp,
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double number = 0.0;  // Number payload
  int exponent = 0;     // Pow payload
  ExprPtr lhs;          // unary child / left operand
  ExprPtr rhs;          // right operand of binary ops
};

// Recursive-descent parser for:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' int)?
//   base   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp'
// Throws Error("SyntaxError") with the byte offset in the witness field, or
// Error("UnknownIdentifier") for names outside the grammar.
ExprPtr parse_expr(std::string_view text);

// Canonical text form; parse_expr(unparse(a)) is structurally identical to a.
std::string unparse(const ExprPtr& ast);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// Evaluates the expression and its derivatives up to `order` (<= kMaxJetOrder)
// by forward Taylor propagation. Throws Error("EvalDomain") on division by
// zero at the evaluation point and Error("Overflow") on non-finite
// intermediates.
Jet eval_jet(const ExprPtr& ast, double x, int order);

// Same but with an arbitrary jet substituted for the variable; this is the
// composition f(inner(.)) evaluated at the point the seed was built from.
Jet eval_jet_seeded(const ExprPtr& ast, const Jet& seed);

// True when the expression is a polynomial of degree <= 1 in x.
bool is_affine(const ExprPtr& ast);

// Shortest decimal form that round-trips through parse.
std::string format_double(double v);

// Programmatic AST builders (negative v is normalized to Neg(Number(-v)) so
// every tree unparses and reparses to an identical structure).
namespace ast {
ExprPtr number(double v);
ExprPtr var();
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);
ExprPtr pow(ExprPtr base, int exponent);
// a + c with the sign folded into Add/Sub so evaluation is bitwise x + c.
ExprPtr add_const(ExprPtr a, double c);
}  // namespace ast

}  // namespace pcm
