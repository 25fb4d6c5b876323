#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcm/expr.hpp"

using namespace pcm;

TEST_CASE("parse follows precedence and shape") {
  ExprPtr e = parse_expr("x/2 + 1/2");
  ExprPtr expected = ast::add(ast::div(ast::var(), ast::number(2)),
                              ast::div(ast::number(1), ast::number(2)));
  CHECK(structurally_equal(e, expected));

  // exponent binds tighter than unary minus
  ExprPtr n = parse_expr("-x^2");
  CHECK(structurally_equal(n, ast::neg(ast::pow(ast::var(), 2))));

  // left association
  ExprPtr s = parse_expr("x - 2 - 1");
  CHECK(structurally_equal(
      s, ast::sub(ast::sub(ast::var(), ast::number(2)), ast::number(1))));

  CHECK(structurally_equal(parse_expr("2*x^2"),
                           ast::mul(ast::number(2), ast::pow(ast::var(), 2))));
  CHECK_NOTHROW(parse_expr("sin(pi*x) + exp(-x) - cos(e)"));
  CHECK_NOTHROW(parse_expr("x^-2"));
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    parse_expr("sin(");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == "SyntaxError");
    CHECK(e.witness() == 4.0);
  }
  try {
    parse_expr("x + foo");
    FAIL("expected UnknownIdentifier");
  } catch (const Error& e) {
    CHECK(e.code() == "UnknownIdentifier");
    CHECK(e.witness() == 4.0);
  }
  CHECK_THROWS_AS(parse_expr(""), Error);
  CHECK_THROWS_AS(parse_expr("x^65"), Error);
  CHECK_THROWS_AS(parse_expr("(x + 1"), Error);
  CHECK_THROWS_AS(parse_expr("x 1"), Error);
  // division nodes parse fine; the error surfaces at evaluation
  CHECK_NOTHROW(parse_expr("1/x"));
}

TEST_CASE("jets of basic expressions") {
  Jet a = eval_jet(parse_expr("x^2"), 3.0, 2);
  CHECK(a[0] == 9.0);
  CHECK(a[1] == 6.0);
  CHECK(a[2] == 2.0);

  Jet b = eval_jet(parse_expr("sin(x)"), 0.0, 3);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 1.0);
  CHECK(b[2] == 0.0);
  CHECK(b[3] == -1.0);

  Jet c = eval_jet(parse_expr("x/2 + 1/2"), 0.25, 1);
  CHECK(c[0] == 0.625);
  CHECK(c[1] == 0.5);

  Jet d = eval_jet(parse_expr("x^-2"), 2.0, 1);
  CHECK(d[0] == 0.25);
  CHECK(d[1] == doctest::Approx(-0.25).epsilon(1e-14));

  Jet ex = eval_jet(parse_expr("exp(2*x)"), 0.5, 3);
  double e1 = std::exp(1.0);
  CHECK(ex[0] == doctest::Approx(e1).epsilon(1e-14));
  CHECK(ex[1] == doctest::Approx(2 * e1).epsilon(1e-14));
  CHECK(ex[3] == doctest::Approx(8 * e1).epsilon(1e-14));
}

TEST_CASE("evaluation errors") {
  try {
    eval_jet(parse_expr("1/x"), 0.0, 0);
    FAIL("expected EvalDomain");
  } catch (const Error& e) {
    CHECK(e.code() == "EvalDomain");
  }
  try {
    eval_jet(parse_expr("exp(exp(exp(x)))"), 100.0, 0);
    FAIL("expected Overflow");
  } catch (const Error& e) {
    CHECK(e.code() == "Overflow");
  }
  CHECK_THROWS_AS(eval_jet(parse_expr("x"), 1.0, 9), Error);
  try {
    eval_jet(parse_expr("x^-1"), 0.0, 0);
    FAIL("expected EvalDomain");
  } catch (const Error& e) {
    CHECK(e.code() == "EvalDomain");
  }
}

namespace {

// random AST generator over the full grammar
ExprPtr random_ast(std::mt19937_64& gen, int depth, bool poly_only) {
  auto pick = [&gen](int n) { return static_cast<int>(gen() % static_cast<unsigned>(n)); };
  if (depth == 0 || pick(4) == 0) {
    switch (pick(poly_only ? 2 : 4)) {
      case 0: {
        double v = (pick(41) - 20) / 8.0;
        return ast::number(v);
      }
      case 1:
        return ast::var();
      case 2:
        return parse_expr("pi");
      default:
        return parse_expr("e");
    }
  }
  int choice = pick(poly_only ? 5 : 8);
  switch (choice) {
    case 0:
      return ast::add(random_ast(gen, depth - 1, poly_only), random_ast(gen, depth - 1, poly_only));
    case 1:
      return ast::sub(random_ast(gen, depth - 1, poly_only), random_ast(gen, depth - 1, poly_only));
    case 2:
      return ast::mul(random_ast(gen, depth - 1, poly_only), random_ast(gen, depth - 1, poly_only));
    case 3:
      return ast::neg(random_ast(gen, depth - 1, poly_only));
    case 4:
      return ast::pow(random_ast(gen, depth - 1, poly_only), pick(4));
    case 5: {
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprKind::Sin;
      node->lhs = random_ast(gen, depth - 1, poly_only);
      return node;
    }
    case 6: {
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprKind::Cos;
      node->lhs = random_ast(gen, depth - 1, poly_only);
      return node;
    }
    default: {
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprKind::Div;
      node->lhs = random_ast(gen, depth - 1, poly_only);
      node->rhs = ast::number(2.0 + pick(5));
      return node;
    }
  }
}

}  // namespace

TEST_CASE("unparse round-trips to an identical tree") {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 300; ++t) {
    ExprPtr a = random_ast(gen, 4, false);
    std::string text = unparse(a);
    ExprPtr b = parse_expr(text);
    CAPTURE(text);
    CHECK(structurally_equal(a, b));
    CHECK(unparse(b) == text);
  }
}

TEST_CASE("jet truncation consistency") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 100; ++t) {
    ExprPtr a = random_ast(gen, 3, false);
    double x = 0.3 + 0.001 * t;
    for (int r = 1; r <= 4; ++r) {
      Jet hi, lo;
      try {
        hi = eval_jet(a, x, r);
        lo = eval_jet(a, x, r - 1);
      } catch (const Error&) {
        continue;  // domain error in a random tree
      }
      for (int k = 0; k < r; ++k) CHECK(hi[k] == lo[k]);
    }
  }
}

TEST_CASE("jet derivatives match central finite differences") {
  std::mt19937_64 gen(23);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 60; ++t) {
    ExprPtr a = random_ast(gen, 3, true);  // polynomials only
    double x = 0.4 + 0.003 * t;
    Jet j;
    try {
      j = eval_jet(a, x, 2);
    } catch (const Error&) {
      continue;
    }
    double h = 1e-5;
    auto f = [&a](double z) { return eval_jet(a, z, 0).value(); };
    double d1 = (f(x + h) - f(x - h)) / (2 * h);
    double d2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
    double scale1 = std::max(1.0, std::abs(j[1]));
    double scale2 = std::max(1.0, std::abs(j[2]));
    CHECK(std::abs(j[1] - d1) / scale1 <= 1e-6);
    CHECK(std::abs(j[2] - d2) / scale2 <= 1e-4);
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("is_affine classification") {
  CHECK(is_affine(parse_expr("2*x - 1")));
  CHECK(is_affine(parse_expr("x/3 + 0.1")));
  CHECK(is_affine(parse_expr("0")));
  CHECK(is_affine(parse_expr("pi*x")));
  CHECK_FALSE(is_affine(parse_expr("x^2")));
  CHECK_FALSE(is_affine(parse_expr("sin(x)")));
  CHECK_FALSE(is_affine(parse_expr("x*x")));
  CHECK(is_affine(parse_expr("sin(2)*x")));
}

TEST_CASE("seeded jets compose") {
  // f(w(x)) with w affine: derivatives pick up the slope factor
  ExprPtr f = parse_expr("x^2");
  Jet w;
  w.order = 2;
  w.coeff = {0.5, 2.0, 0.0, 0, 0, 0, 0, 0, 0};
  Jet out = eval_jet_seeded(f, w);
  CHECK(out[0] == 0.25);
  CHECK(out[1] == 2.0 * 2.0 * 0.5);  // f'(w) w'
  CHECK(out[2] == doctest::Approx(2.0 * 4.0).epsilon(1e-14));
}
