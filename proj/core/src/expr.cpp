#include "pcm/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace pcm {

Jet Jet::variable(double x, int order) {
  Jet j;
  j.order = order;
  j.coeff[0] = x;
  if (order >= 1) j.coeff[1] = 1.0;
  return j;
}

Jet Jet::constant(double v, int order) {
  Jet j;
  j.order = order;
  j.coeff[0] = v;
  return j;
}

namespace {

// ---------------------------------------------------------------------------
// Taylor-coefficient jets. The public Jet stores derivatives; internally we
// propagate Taylor coefficients a_k = f^(k)/k! which keeps the product and
// composition recurrences convolution-shaped.
// ---------------------------------------------------------------------------

struct TJet {
  int n = 0;  // number of coefficients = order + 1
  std::array<double, kMaxJetOrder + 1> a{};
};

constexpr std::array<double, kMaxJetOrder + 1> kFactorial = {
    1, 1, 2, 6, 24, 120, 720, 5040, 40320};

[[noreturn]] void eval_domain(const char* what, double x) {
  throw Error("EvalDomain", std::string(what), x);
}

void check_finite(const TJet& j, double x) {
  for (int k = 0; k < j.n; ++k) {
    if (!std::isfinite(j.a[static_cast<std::size_t>(k)]))
      throw Error("Overflow", "non-finite intermediate in jet evaluation", x);
  }
}

TJet t_const(double v, int n) {
  TJet r;
  r.n = n;
  r.a[0] = v;
  return r;
}

TJet t_add(const TJet& a, const TJet& b) {
  TJet r;
  r.n = a.n;
  for (int k = 0; k < r.n; ++k) r.a[k] = a.a[k] + b.a[k];
  return r;
}

TJet t_sub(const TJet& a, const TJet& b) {
  TJet r;
  r.n = a.n;
  for (int k = 0; k < r.n; ++k) r.a[k] = a.a[k] - b.a[k];
  return r;
}

TJet t_neg(const TJet& a) {
  TJet r;
  r.n = a.n;
  for (int k = 0; k < r.n; ++k) r.a[k] = -a.a[k];
  return r;
}

TJet t_mul(const TJet& a, const TJet& b) {
  TJet r;
  r.n = a.n;
  for (int k = 0; k < r.n; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += a.a[j] * b.a[k - j];
    r.a[k] = s;
  }
  return r;
}

TJet t_div(const TJet& a, const TJet& b, double x) {
  if (b.a[0] == 0.0) eval_domain("division by zero", x);
  TJet q;
  q.n = a.n;
  for (int k = 0; k < q.n; ++k) {
    double s = a.a[k];
    for (int j = 0; j < k; ++j) s -= q.a[j] * b.a[k - j];
    q.a[k] = s / b.a[0];
  }
  return q;
}

TJet t_pow(const TJet& base, int e, double x) {
  if (e == 0) return t_const(1.0, base.n);
  if (e < 0) {
    if (base.a[0] == 0.0) eval_domain("zero raised to a negative power", x);
    return t_div(t_const(1.0, base.n), t_pow(base, -e, x), x);
  }
  TJet acc = t_const(1.0, base.n);
  TJet sq = base;
  int p = e;
  while (p > 0) {
    if (p & 1) acc = t_mul(acc, sq);
    p >>= 1;
    if (p > 0) sq = t_mul(sq, sq);
  }
  return acc;
}

void t_sincos(const TJet& u, TJet& s, TJet& c) {
  s.n = c.n = u.n;
  s.a[0] = std::sin(u.a[0]);
  c.a[0] = std::cos(u.a[0]);
  for (int k = 1; k < u.n; ++k) {
    double sk = 0.0, ck = 0.0;
    for (int j = 1; j <= k; ++j) {
      sk += j * u.a[j] * c.a[k - j];
      ck += j * u.a[j] * s.a[k - j];
    }
    s.a[k] = sk / k;
    c.a[k] = -ck / k;
  }
}

TJet t_exp(const TJet& u) {
  TJet e;
  e.n = u.n;
  e.a[0] = std::exp(u.a[0]);
  for (int k = 1; k < u.n; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * u.a[j] * e.a[k - j];
    e.a[k] = s / k;
  }
  return e;
}

TJet t_eval(const ExprNode& node, const TJet& seed, double x) {
  TJet r;
  switch (node.kind) {
    case ExprKind::Number:
      r = t_const(node.number, seed.n);
      break;
    case ExprKind::Variable:
      r = seed;
      break;
    case ExprKind::ConstPi:
      r = t_const(std::numbers::pi, seed.n);
      break;
    case ExprKind::ConstE:
      r = t_const(std::numbers::e, seed.n);
      break;
    case ExprKind::Add:
      r = t_add(t_eval(*node.lhs, seed, x), t_eval(*node.rhs, seed, x));
      break;
    case ExprKind::Sub:
      r = t_sub(t_eval(*node.lhs, seed, x), t_eval(*node.rhs, seed, x));
      break;
    case ExprKind::Mul:
      r = t_mul(t_eval(*node.lhs, seed, x), t_eval(*node.rhs, seed, x));
      break;
    case ExprKind::Div:
      r = t_div(t_eval(*node.lhs, seed, x), t_eval(*node.rhs, seed, x), x);
      break;
    case ExprKind::Pow:
      r = t_pow(t_eval(*node.lhs, seed, x), node.exponent, x);
      break;
    case ExprKind::Neg:
      r = t_neg(t_eval(*node.lhs, seed, x));
      break;
    case ExprKind::Sin: {
      TJet s, c;
      t_sincos(t_eval(*node.lhs, seed, x), s, c);
      r = s;
      break;
    }
    case ExprKind::Cos: {
      TJet s, c;
      t_sincos(t_eval(*node.lhs, seed, x), s, c);
      r = c;
      break;
    }
    case ExprKind::Exp:
      r = t_exp(t_eval(*node.lhs, seed, x));
      break;
  }
  check_finite(r, x);
  return r;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void syntax_error(const std::string& what, std::size_t at) const {
    throw Error("SyntaxError", what + " at offset " + std::to_string(at),
                static_cast<double>(at));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  ExprPtr parse() {
    skip_ws();
    if (pos >= text.size()) syntax_error("empty expression", 0);
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos != text.size()) syntax_error("trailing input", pos);
    return e;
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = ast::add(lhs, parse_term());
      else if (eat('-'))
        lhs = ast::sub(lhs, parse_term());
      else
        return lhs;
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = ast::mul(lhs, parse_factor());
      else if (eat('/'))
        lhs = ast::div(lhs, parse_factor());
      else
        return lhs;
    }
  }

  ExprPtr parse_factor() {
    if (eat('-')) return ast::neg(parse_factor());
    ExprPtr base = parse_base();
    skip_ws();
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      return ast::pow(base, parse_int_exponent());
    }
    return base;
  }

  int parse_int_exponent() {
    skip_ws();
    std::size_t start = pos;
    bool negative = false;
    if (pos < text.size() && text[pos] == '-') {
      negative = true;
      ++pos;
    }
    std::size_t digits = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits) syntax_error("expected integer exponent", start);
    long v = 0;
    auto res = std::from_chars(text.data() + digits, text.data() + pos, v);
    if (res.ec != std::errc{} || v > 64) syntax_error("exponent out of range", start);
    return negative ? -static_cast<int>(v) : static_cast<int>(v);
  }

  ExprPtr parse_base() {
    skip_ws();
    if (pos >= text.size()) syntax_error("expected expression", pos);
    char c = text[pos];
    if (c == '(') {
      ++pos;
      ExprPtr inner = parse_sum();
      if (!eat(')')) syntax_error("expected ')'", pos);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    syntax_error("unexpected character", pos);
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      // exponent part only when followed by digits (optionally signed);
      // otherwise the 'e' is Euler's constant in a product like "2e".
      std::size_t save = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      } else {
        pos = save;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, v);
    if (res.ec != std::errc{} || res.ptr != text.data() + pos)
      syntax_error("malformed number", start);
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprKind::Number;
    node->number = v;
    return node;
  }

  ExprPtr parse_name() {
    std::size_t start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    std::string_view name = text.substr(start, pos - start);
    auto make = [](ExprKind k) {
      auto node = std::make_shared<ExprNode>();
      node->kind = k;
      return node;
    };
    if (name == "x") return make(ExprKind::Variable);
    if (name == "pi") return make(ExprKind::ConstPi);
    if (name == "e") return make(ExprKind::ConstE);
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!eat('(')) syntax_error("expected '(' after function name", pos);
      ExprPtr arg = parse_sum();
      if (!eat(')')) syntax_error("expected ')'", pos);
      auto node = std::make_shared<ExprNode>();
      node->kind = name == "sin" ? ExprKind::Sin
                 : name == "cos" ? ExprKind::Cos
                                 : ExprKind::Exp;
      node->lhs = arg;
      return node;
    }
    throw Error("UnknownIdentifier",
                "unknown identifier '" + std::string(name) + "' at offset " +
                    std::to_string(start),
                static_cast<double>(start));
  }
};

// precedence levels used by the printer; atoms are 5
int prec(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print(const ExprNode& n, std::string& out) {
  auto child = [&out](const ExprNode& c, bool parens) {
    if (parens) out.push_back('(');
    print(c, out);
    if (parens) out.push_back(')');
  };
  switch (n.kind) {
    case ExprKind::Number:
      out += format_double(n.number);
      break;
    case ExprKind::Variable:
      out += "x";
      break;
    case ExprKind::ConstPi:
      out += "pi";
      break;
    case ExprKind::ConstE:
      out += "e";
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      int p = prec(n);
      child(*n.lhs, prec(*n.lhs) < p);
      out += n.kind == ExprKind::Add ? " + "
           : n.kind == ExprKind::Sub ? " - "
           : n.kind == ExprKind::Mul ? "*"
                                     : "/";
      child(*n.rhs, prec(*n.rhs) <= p);
      break;
    }
    case ExprKind::Neg:
      out.push_back('-');
      child(*n.lhs, prec(*n.lhs) < 3);
      break;
    case ExprKind::Pow:
      child(*n.lhs, prec(*n.lhs) < 5);
      out.push_back('^');
      out += std::to_string(n.exponent);
      break;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      out += n.kind == ExprKind::Sin ? "sin(" : n.kind == ExprKind::Cos ? "cos(" : "exp(";
      print(*n.lhs, out);
      out.push_back(')');
      break;
  }
}

// polynomial degree in x when <= 1, otherwise -1
int affine_degree(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Number:
    case ExprKind::ConstPi:
    case ExprKind::ConstE:
      return 0;
    case ExprKind::Variable:
      return 1;
    case ExprKind::Add:
    case ExprKind::Sub: {
      int a = affine_degree(*n.lhs), b = affine_degree(*n.rhs);
      return (a < 0 || b < 0) ? -1 : std::max(a, b);
    }
    case ExprKind::Mul: {
      int a = affine_degree(*n.lhs), b = affine_degree(*n.rhs);
      if (a < 0 || b < 0 || a + b > 1) return -1;
      return a + b;
    }
    case ExprKind::Div: {
      int a = affine_degree(*n.lhs), b = affine_degree(*n.rhs);
      return (a < 0 || b != 0) ? -1 : a;
    }
    case ExprKind::Neg:
      return affine_degree(*n.lhs);
    case ExprKind::Pow: {
      int a = affine_degree(*n.lhs);
      if (a < 0) return -1;
      if (n.exponent == 0) return 0;
      int d = a * n.exponent;
      return (d >= 0 && d <= 1) ? d : -1;
    }
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      return affine_degree(*n.lhs) == 0 ? 0 : -1;
  }
  return -1;
}

}  // namespace

ExprPtr parse_expr(std::string_view text) {
  if (text.empty()) throw Error("SyntaxError", "empty expression", 0.0);
  Parser p{text};
  return p.parse();
}

std::string unparse(const ExprPtr& astp) {
  std::string out;
  print(*astp, out);
  return out;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Number:
      return a->number == b->number;
    case ExprKind::Pow:
      return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case ExprKind::Variable:
    case ExprKind::ConstPi:
    case ExprKind::ConstE:
      return true;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    default:
      return structurally_equal(a->lhs, b->lhs);
  }
}

Jet eval_jet(const ExprPtr& ast, double x, int order) {
  return eval_jet_seeded(ast, Jet::variable(x, order));
}

Jet eval_jet_seeded(const ExprPtr& ast, const Jet& seed) {
  if (seed.order < 0 || seed.order > kMaxJetOrder)
    throw Error("OrderTooHigh",
                "jet order must be in [0, " + std::to_string(kMaxJetOrder) + "]");
  if (!std::isfinite(seed.coeff[0]))
    throw Error("Overflow", "non-finite evaluation point");
  TJet s;
  s.n = seed.order + 1;
  for (int k = 0; k < s.n; ++k) s.a[k] = seed.coeff[k] / kFactorial[k];
  TJet t = t_eval(*ast, s, seed.coeff[0]);
  Jet out;
  out.order = seed.order;
  for (int k = 0; k < t.n; ++k) out.coeff[k] = t.a[k] * kFactorial[k];
  return out;
}

bool is_affine(const ExprPtr& ast) { return affine_degree(*ast) >= 0; }

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace ast {

ExprPtr number(double v) {
  if (std::signbit(v)) return neg(number(-v));
  auto node = std::make_shared<ExprNode>();
  node->kind = ExprKind::Number;
  node->number = v;
  return node;
}

ExprPtr var() {
  auto node = std::make_shared<ExprNode>();
  node->kind = ExprKind::Variable;
  return node;
}

namespace {
ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto node = std::make_shared<ExprNode>();
  node->kind = k;
  node->lhs = std::move(a);
  node->rhs = std::move(b);
  return node;
}
}  // namespace

ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprKind::Div, std::move(a), std::move(b)); }

ExprPtr neg(ExprPtr a) {
  auto node = std::make_shared<ExprNode>();
  node->kind = ExprKind::Neg;
  node->lhs = std::move(a);
  return node;
}

ExprPtr pow(ExprPtr base, int exponent) {
  auto node = std::make_shared<ExprNode>();
  node->kind = ExprKind::Pow;
  node->exponent = exponent;
  node->lhs = std::move(base);
  return node;
}

ExprPtr add_const(ExprPtr a, double c) {
  if (c == 0.0) return a;
  if (std::signbit(c)) return sub(std::move(a), number(-c));
  return add(std::move(a), number(c));
}

}  // namespace ast

}  // namespace pcm
