#include "pcm/pcmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcm {

double hausdorff_interval(const IntervalPair& I, const IntervalPair& J) {
  return std::max(std::abs(I.lo - J.lo), std::abs(I.hi - J.hi));
}

// ---------------------------------------------------------------------------
// PiecewiseAffine
// ---------------------------------------------------------------------------

PiecewiseAffine::PiecewiseAffine(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2)
    throw Error("FormatError", "warp needs at least two knots");
  for (std::size_t k = 0; k < xs_.size(); ++k) {
    if (!std::isfinite(xs_[k]) || !std::isfinite(ys_[k]))
      throw Error("FormatError", "non-finite warp knot");
    if (k > 0 && !(xs_[k] > xs_[k - 1] && ys_[k] > ys_[k - 1]))
      throw Error("FormatError", "warp knots must be strictly increasing", xs_[k]);
  }
}

PiecewiseAffine PiecewiseAffine::identity(const IntervalPair& I) {
  return PiecewiseAffine({I.lo, I.hi}, {I.lo, I.hi});
}

double PiecewiseAffine::operator()(double x) const {
  auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
  if (it != xs_.end() && *it == x) return ys_[static_cast<std::size_t>(it - xs_.begin())];
  std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  if (hi == 0) hi = 1;
  if (hi >= xs_.size()) hi = xs_.size() - 1;
  std::size_t lo = hi - 1;
  double t = (ys_[hi] - ys_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + (x - xs_[lo]) * t;
}

double PiecewiseAffine::inverse(double y) const {
  auto it = std::lower_bound(ys_.begin(), ys_.end(), y);
  if (it != ys_.end() && *it == y) return xs_[static_cast<std::size_t>(it - ys_.begin())];
  std::size_t hi = static_cast<std::size_t>(it - ys_.begin());
  if (hi == 0) hi = 1;
  if (hi >= ys_.size()) hi = ys_.size() - 1;
  std::size_t lo = hi - 1;
  double t = (xs_[hi] - xs_[lo]) / (ys_[hi] - ys_[lo]);
  return xs_[lo] + (y - ys_[lo]) * t;
}

double PiecewiseAffine::slope_at(double x) const {
  std::size_t hi = static_cast<std::size_t>(
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
  if (hi == 0) hi = 1;
  if (hi >= xs_.size()) hi = xs_.size() - 1;
  std::size_t lo = hi - 1;
  return (ys_[hi] - ys_[lo]) / (xs_[hi] - xs_[lo]);
}

Jet PiecewiseAffine::jet_at(double x, int order) const {
  Jet j;
  j.order = order;
  j.coeff[0] = (*this)(x);
  if (order >= 1) j.coeff[1] = slope_at(x);
  return j;
}

bool PiecewiseAffine::is_identity() const {
  for (std::size_t k = 0; k < xs_.size(); ++k)
    if (xs_[k] != ys_[k]) return false;
  return true;
}

double PiecewiseAffine::max_deviation_from_identity() const {
  double m = 0.0;
  for (std::size_t k = 0; k < xs_.size(); ++k)
    m = std::max(m, std::abs(ys_[k] - xs_[k]));
  return m;
}

std::string PiecewiseAffine::serialize() const {
  std::string out;
  for (std::size_t k = 0; k < xs_.size(); ++k) {
    if (k) out += ", ";
    out += format_double(xs_[k]);
    out += ":";
    out += format_double(ys_[k]);
  }
  return out;
}

PiecewiseAffine PiecewiseAffine::compose(const PiecewiseAffine& outer,
                                         const PiecewiseAffine& inner) {
  std::vector<double> xs = inner.xs_;
  for (double t : outer.xs_) {
    if (t > inner.ys_.front() && t < inner.ys_.back()) xs.push_back(inner.inverse(t));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) ys.push_back(outer(inner(x)));
  return PiecewiseAffine(std::move(xs), std::move(ys));
}

PiecewiseAffine PiecewiseAffine::restrict(double lo, double hi) const {
  std::vector<double> xs{lo}, ys{(*this)(lo)};
  for (std::size_t k = 0; k < xs_.size(); ++k) {
    if (xs_[k] > lo && xs_[k] < hi) {
      xs.push_back(xs_[k]);
      ys.push_back(ys_[k]);
    }
  }
  xs.push_back(hi);
  ys.push_back((*this)(hi));
  return PiecewiseAffine(std::move(xs), std::move(ys));
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number_token(const std::string& tok, const char* what) {
  std::string t = trim(tok);
  if (t.empty()) throw Error("FormatError", std::string("empty ") + what);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw Error("FormatError", std::string("malformed ") + what + ": " + t);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error("FormatError", std::string("malformed ") + what + ": " + t);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<double> parse_bracket_list(const std::string& value, const char* what) {
  std::string v = trim(value);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw Error("FormatError", std::string(what) + " must be a [..] list");
  std::string inner = trim(v.substr(1, v.size() - 2));
  std::vector<double> out;
  if (inner.empty()) return out;
  for (const auto& tok : split(inner, ',')) out.push_back(parse_number_token(tok, what));
  return out;
}

}  // namespace

PiecewiseAffine PiecewiseAffine::parse(std::string_view text) {
  std::vector<double> xs, ys;
  for (const auto& tok : split(std::string(text), ',')) {
    auto parts = split(tok, ':');
    if (parts.size() != 2) throw Error("FormatError", "warp knot must be x:y, got: " + tok);
    xs.push_back(parse_number_token(parts[0], "warp knot"));
    ys.push_back(parse_number_token(parts[1], "warp knot"));
  }
  return PiecewiseAffine(std::move(xs), std::move(ys));
}

// ---------------------------------------------------------------------------
// BranchFn
// ---------------------------------------------------------------------------

Jet BranchFn::jet(double x, int order) const {
  if (!warp) return eval_jet(ast, x, order);
  return eval_jet_seeded(ast, warp->jet_at(x, order));
}

// ---------------------------------------------------------------------------
// PCMap
// ---------------------------------------------------------------------------

PCMap PCMap::create(IntervalPair domain, int order, std::vector<double> breakpoints,
                    std::vector<BranchFn> branches, const LoadOptions& opts) {
  PCMap m;
  if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.hi > domain.lo))
    throw Error("FormatError", "interval must be finite with positive length");
  if (order < 0 || order > kMaxJetOrder)
    throw Error("FormatError", "order must be in [0, " + std::to_string(kMaxJetOrder) + "]");
  if (breakpoints.empty())
    throw Error("FormatError", "at least one breakpoint is required (N >= 2)");
  if (branches.size() != breakpoints.size() + 1)
    throw Error("FormatError", "need len(breakpoints)+1 branches, got " +
                                   std::to_string(branches.size()));
  m.domain_ = domain;
  m.order_ = order;
  m.clamp_ = opts.clamp;
  m.cuts_.push_back(domain.lo);
  for (double c : breakpoints) m.cuts_.push_back(c);
  m.cuts_.push_back(domain.hi);
  m.branches_ = std::move(branches);
  m.validate(opts);
  return m;
}

PCMap PCMap::from_exprs(IntervalPair domain, int order, std::vector<double> breakpoints,
                        const std::vector<std::string>& branch_exprs,
                        const LoadOptions& opts) {
  std::vector<BranchFn> branches;
  branches.reserve(branch_exprs.size());
  for (const auto& text : branch_exprs) branches.push_back(BranchFn{parse_expr(text), {}});
  return create(domain, order, std::move(breakpoints), std::move(branches), opts);
}

namespace {

struct RangeChecker {
  const BranchFn& br;
  int branch_index;
  int jet_order;
  double lo_bound, hi_bound;

  Jet sample(double x) const {
    Jet j;
    try {
      j = br.jet(x, jet_order);
    } catch (const Error& e) {
      throw Error("SmoothnessError",
                  "branch " + std::to_string(branch_index) +
                      " is not smooth on its closed piece (" + e.what() + ")",
                  x);
    }
    return j;
  }

  void check_point(double x, double v) const {
    if (v < lo_bound || v > hi_bound)
      throw Error("RangeViolation",
                  "branch " + std::to_string(branch_index) + " maps " + format_double(x) +
                      " to " + format_double(v) + " outside X",
                  x);
  }

  // Secant envelope from the endpoint slopes, inflated by the slope variation
  // to absorb curvature. Inconclusive cells are resampled at the midpoint, a
  // few levels deep; maps that attain the boundary exactly stay admissible.
  void check_cell(double xa, const Jet& ja, double xb, const Jet& jb, int depth) const {
    double w = xb - xa;
    double lam = std::max(std::abs(ja[1]), std::abs(jb[1])) + std::abs(jb[1] - ja[1]);
    double mid = 0.5 * (ja.value() + jb.value());
    double slack = 0.5 * lam * w;
    if (mid + slack <= hi_bound && mid - slack >= lo_bound) return;
    if (depth == 0) return;  // contracted grid density reached; envelope inconclusive
    double xm = 0.5 * (xa + xb);
    Jet jm = sample(xm);
    check_point(xm, jm.value());
    check_cell(xa, ja, xm, jm, depth - 1);
    check_cell(xm, jm, xb, jb, depth - 1);
  }
};

}  // namespace

void PCMap::validate(const LoadOptions& opts) const {
  const int N = piece_count();
  for (int i = 1; i <= N; ++i) {
    if (!std::isfinite(cut(i)) || !(cut(i) > cut(i - 1)))
      throw Error("BreakpointOrderError",
                  "breakpoints must be strictly increasing and interior to X", cut(i));
  }

  const double tau = 1e-9;
  const int grid = std::max(opts.grid_per_piece, 8);
  const int jet_order = std::max(order_, 1);

  for (int i = 1; i <= N; ++i) {
    IntervalPair piece = piece_closure(i);
    const BranchFn& br = branches_[static_cast<std::size_t>(i - 1)];
    if (br.warp) {
      if (br.warp->xs().front() != piece.lo || br.warp->xs().back() != piece.hi)
        throw Error("FormatError", "warp domain must equal the closed piece", piece.lo);
    }
    RangeChecker checker{br, i, jet_order, domain_.lo - tau, domain_.hi + tau};
    double h = piece.length() / grid;
    Jet prev;
    double prev_x = 0.0;
    for (int k = 0; k <= grid; ++k) {
      double x = k == grid ? piece.hi : piece.lo + k * h;
      Jet j = checker.sample(x);
      for (int d = 0; d <= order_; ++d) {
        if (!std::isfinite(j[d]))
          throw Error("SmoothnessError",
                      "branch " + std::to_string(i) + " has a non-finite derivative", x);
      }
      if (!opts.clamp) {
        checker.check_point(x, j.value());
        if (k > 0) checker.check_cell(prev_x, prev, x, j, 6);
      }
      prev = j;
      prev_x = x;
    }
  }
}

PCMap PCMap::load(std::string_view document, const LoadOptions& opts) {
  std::optional<IntervalPair> domain;
  std::optional<int> order;
  std::optional<std::vector<double>> breakpoints;
  std::vector<std::pair<int, std::string>> branch_lines;
  std::vector<std::pair<int, std::string>> warp_lines;

  std::istringstream in{std::string(document)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("FormatError", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "interval") {
      auto v = parse_bracket_list(value, "interval");
      if (v.size() != 2) throw Error("FormatError", "interval must have two endpoints");
      domain = IntervalPair{v[0], v[1]};
    } else if (key == "order") {
      order = static_cast<int>(parse_number_token(value, "order"));
    } else if (key == "breakpoints") {
      breakpoints = parse_bracket_list(value, "breakpoints");
    } else if (key.rfind("branch", 0) == 0) {
      int k = static_cast<int>(parse_number_token(key.substr(6), "branch index"));
      branch_lines.emplace_back(k, value);
    } else if (key.rfind("warp", 0) == 0) {
      int k = static_cast<int>(parse_number_token(key.substr(4), "warp index"));
      warp_lines.emplace_back(k, value);
    } else {
      throw Error("FormatError", "unknown key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  if (!domain) throw Error("FormatError", "missing interval");
  if (!order) throw Error("FormatError", "missing order");
  if (!breakpoints) throw Error("FormatError", "missing breakpoints");
  const std::size_t N = breakpoints->size() + 1;
  if (branch_lines.size() != N)
    throw Error("FormatError", "expected " + std::to_string(N) + " branch lines, got " +
                                   std::to_string(branch_lines.size()));
  std::vector<BranchFn> branches(N);
  std::vector<bool> seen(N, false);
  for (std::size_t idx = 0; idx < branch_lines.size(); ++idx) {
    auto [k, text] = branch_lines[idx];
    if (k != static_cast<int>(idx) + 1)
      throw Error("FormatError", "branch lines must be numbered 1..N in order");
    seen[static_cast<std::size_t>(k - 1)] = true;
    branches[static_cast<std::size_t>(k - 1)].ast = parse_expr(text);
  }
  for (auto& [k, text] : warp_lines) {
    if (k < 1 || static_cast<std::size_t>(k) > N || !seen[static_cast<std::size_t>(k - 1)])
      throw Error("FormatError", "warp " + std::to_string(k) + " has no matching branch");
    branches[static_cast<std::size_t>(k - 1)].warp = PiecewiseAffine::parse(text);
  }
  return create(*domain, *order, std::move(*breakpoints), std::move(branches), opts);
}

std::vector<double> PCMap::breakpoints() const {
  return std::vector<double>(cuts_.begin() + 1, cuts_.end() - 1);
}

IntervalPair PCMap::piece_closure(int piece) const {
  if (piece < 1 || piece > piece_count())
    throw Error("OutsidePiece", "piece index out of range: " + std::to_string(piece));
  return {cut(piece - 1), cut(piece)};
}

const BranchFn& PCMap::branch(int piece) const {
  if (piece < 1 || piece > piece_count())
    throw Error("OutsidePiece", "piece index out of range: " + std::to_string(piece));
  return branches_[static_cast<std::size_t>(piece - 1)];
}

bool PCMap::is_breakpoint(double x) const {
  for (int i = 1; i <= piece_count() - 1; ++i)
    if (cut(i) == x) return true;
  return false;
}

int PCMap::piece_of(double x) const {
  if (!(x >= domain_.lo && x <= domain_.hi))
    throw Error("OutsideDomain", "x = " + format_double(x) + " is outside X", x);
  if (is_breakpoint(x))
    throw Error("ValueAtBreakpoint",
                "the map value is not defined at the breakpoint " + format_double(x), x);
  auto it = std::upper_bound(cuts_.begin(), cuts_.end(), x);
  int idx = static_cast<int>(it - cuts_.begin());
  return std::clamp(idx, 1, piece_count());
}

double PCMap::eval(double x) const {
  int piece = piece_of(x);
  double v = branches_[static_cast<std::size_t>(piece - 1)].value(x);
  if (clamp_) v = std::clamp(v, domain_.lo, domain_.hi);
  return v;
}

double PCMap::branch_value(int piece, int deriv, double x) const {
  return branch_jet(piece, deriv, x)[deriv];
}

Jet PCMap::branch_jet(int piece, int order, double x) const {
  if (order < 0 || order > order_)
    throw Error("OrderTooHigh", "derivative order " + std::to_string(order) +
                                    " exceeds the declared smoothness r = " +
                                    std::to_string(order_));
  IntervalPair piece_iv = piece_closure(piece);
  if (!piece_iv.contains(x))
    throw Error("OutsidePiece",
                "x = " + format_double(x) + " is outside the closed piece " +
                    std::to_string(piece),
                x);
  return branches_[static_cast<std::size_t>(piece - 1)].jet(x, order);
}

double PCMap::min_piece_length() const {
  double m = cuts_[1] - cuts_[0];
  for (int i = 2; i <= piece_count(); ++i) m = std::min(m, cut(i) - cut(i - 1));
  return m;
}

bool PCMap::same_shape(const PCMap& other) const {
  return domain_.lo == other.domain_.lo && domain_.hi == other.domain_.hi &&
         piece_count() == other.piece_count();
}

std::string PCMap::to_document() const {
  std::string out;
  out += "interval = [" + format_double(domain_.lo) + ", " + format_double(domain_.hi) + "]\n";
  out += "order = " + std::to_string(order_) + "\n";
  out += "breakpoints = [";
  for (int i = 1; i <= piece_count() - 1; ++i) {
    if (i > 1) out += ", ";
    out += format_double(cut(i));
  }
  out += "]\n";
  for (int i = 1; i <= piece_count(); ++i) {
    const BranchFn& br = branches_[static_cast<std::size_t>(i - 1)];
    out += "branch " + std::to_string(i) + " = " + unparse(br.ast) + "\n";
    if (br.warp) out += "warp " + std::to_string(i) + " = " + br.warp->serialize() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// xi
// ---------------------------------------------------------------------------

double xi_affine(const IntervalPair& from, const IntervalPair& to, double x) {
  if (from.lo == to.lo && from.hi == to.hi) return x;
  if (x == from.lo) return to.lo;
  if (x == from.hi) return to.hi;
  double slope = (to.hi - to.lo) / (from.hi - from.lo);
  return slope * (x - from.hi) + to.hi;
}

double xi_deform_piece(const PCMap& f, const PCMap& g, int piece, double x) {
  if (!f.same_shape(g)) throw Error("ShapeMismatch", "maps must share X and N");
  return xi_affine(f.piece_closure(piece), g.piece_closure(piece), x);
}

double xi_deform(const PCMap& f, const PCMap& g, double x) {
  if (!f.same_shape(g)) throw Error("ShapeMismatch", "maps must share X and N");
  if (!(x >= f.domain().lo && x <= f.domain().hi))
    throw Error("OutsideDomain", "x = " + format_double(x) + " is outside X", x);
  for (int i = 1; i <= f.piece_count() - 1; ++i)
    if (f.cut(i) == x) return g.cut(i);
  int piece = f.piece_of(x);
  return xi_affine(f.piece_closure(piece), g.piece_closure(piece), x);
}

}  // namespace pcm
