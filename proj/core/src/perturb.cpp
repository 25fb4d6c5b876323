#include "pcm/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pcm/errors.hpp"
#include "pcm/rng.hpp"

namespace pcm {

namespace {

// branch k of the deformed map: original expression evaluated through the
// affine (or piecewise-affine) reparametrization of the piece
BranchFn reparametrized(const BranchFn& br, const IntervalPair& new_piece,
                        const IntervalPair& old_piece) {
  if (new_piece.lo == old_piece.lo && new_piece.hi == old_piece.hi) return br;
  PiecewiseAffine w({new_piece.lo, new_piece.hi}, {old_piece.lo, old_piece.hi});
  BranchFn out{br.ast, {}};
  out.warp = br.warp ? PiecewiseAffine::compose(*br.warp, w) : w;
  return out;
}

BranchFn warped(const BranchFn& br, const PiecewiseAffine& w) {
  BranchFn out{br.ast, {}};
  if (w.is_identity()) {
    out.warp = br.warp;
  } else {
    out.warp = br.warp ? PiecewiseAffine::compose(*br.warp, w) : w;
  }
  return out;
}

}  // namespace

PCMap perturb_breakpoint(const PCMap& f, int i, double a, double b, double eps,
                         bool right_limit, const SupOptions& opts) {
  const int N = f.piece_count();
  if (i < 1 || i > N - 1)
    throw Error("OutsidePiece", "breakpoint index out of range: " + std::to_string(i));
  if (!(eps > 0)) throw Error("TargetTooFar", "eps must be positive");
  const double c = f.cut(i);
  const int side = right_limit ? i + 1 : i;
  const double limit = f.branch_value(side, 0, c);
  if (!(std::abs(a - c) < eps / N))
    throw Error("TargetTooFar",
                "breakpoint target is out of the eps/N window: |a - c_i| = " +
                    format_double(std::abs(a - c)),
                a);
  if (!(std::abs(b - limit) < eps / N))
    throw Error("TargetTooFar",
                "value target is out of the eps/N window: |b - limit| = " +
                    format_double(std::abs(b - limit)),
                b);
  if (!(a > f.cut(i - 1) && a < f.cut(i + 1)))
    throw Error("OrderCollision", "target breakpoint would break the ordering", a);

  std::vector<double> cuts;
  for (int k = 1; k <= N - 1; ++k) cuts.push_back(k == i ? a : f.cut(k));

  std::vector<BranchFn> branches;
  branches.reserve(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    IntervalPair old_piece = f.piece_closure(k);
    IntervalPair new_piece{k == 1 ? f.domain().lo : cuts[static_cast<std::size_t>(k - 2)],
                           k == N ? f.domain().hi : cuts[static_cast<std::size_t>(k - 1)]};
    BranchFn br = reparametrized(f.branch(k), new_piece, old_piece);
    if (k == side && b != limit) {
      // (value - limit) + b reaches b exactly at the deformed breakpoint
      br.ast = ast::add_const(ast::add_const(br.ast, -limit), b);
    }
    branches.push_back(std::move(br));
  }

  PCMap g = PCMap::create(f.domain(), f.order(), std::move(cuts), std::move(branches));
  double achieved = g.branch_value(side, 0, a);
  if (g.cut(i) != a || achieved != b)
    throw Error("VerificationFailed",
                "exact postcondition failed: limit = " + format_double(achieved));
  Bounds comp = comp_metric(f, g, 0, opts);
  if (!(comp.upper < eps))
    throw Error("VerificationFailed",
                "comp^0(f,g) upper " + format_double(comp.upper) + " is not below eps");
  return g;
}

PCMap random_neighbor(const PCMap& f, double eps, std::uint64_t seed, const SupOptions& opts) {
  const int N = f.piece_count();
  const int r = f.order();
  if (!(eps > 0) || !(eps < 0.5 * f.min_piece_length()))
    throw Error("SamplingFailed",
                "eps must be positive and below half the minimum piece length", eps);
  Rng rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    double scale = std::ldexp(1.0, -attempt);
    double jit = eps / (4.0 * N) * scale;
    double shift_amp = eps / (4.0 * N * (r + 1)) * scale;

    std::vector<double> cuts;
    bool ordered = true;
    double prev = f.domain().lo;
    for (int k = 1; k <= N - 1; ++k) {
      double c = f.cut(k) + rng.uniform(-1.0, 1.0) * jit;
      if (!(c > prev)) ordered = false;
      cuts.push_back(c);
      prev = c;
    }
    if (!(prev < f.domain().hi)) ordered = false;
    std::vector<double> shifts;
    for (int k = 1; k <= N; ++k) shifts.push_back(rng.uniform(-1.0, 1.0) * shift_amp);
    if (!ordered) continue;

    std::vector<BranchFn> branches;
    for (int k = 1; k <= N; ++k) {
      IntervalPair old_piece = f.piece_closure(k);
      IntervalPair new_piece{k == 1 ? f.domain().lo : cuts[static_cast<std::size_t>(k - 2)],
                             k == N ? f.domain().hi : cuts[static_cast<std::size_t>(k - 1)]};
      BranchFn br = reparametrized(f.branch(k), new_piece, old_piece);
      br.ast = ast::add_const(br.ast, shifts[static_cast<std::size_t>(k - 1)]);
      branches.push_back(std::move(br));
    }
    try {
      PCMap g = PCMap::create(f.domain(), r, std::move(cuts), std::move(branches));
      if (comp_metric(f, g, r, opts).upper < eps) return g;
    } catch (const Error&) {
      // out of range at this jitter; shrink and retry
    }
  }
  throw Error("SamplingFailed", "no admissible neighbor after 16 attempts");
}

RepairResult repair_connections(const PCMap& f, int horizon, double eps, std::uint64_t /*seed*/,
                                const SupOptions& opts) {
  const int N = f.piece_count();
  const double orbit_tol = 1e-11;
  if (!(eps > 0)) throw Error("NoRoomToMove", "eps must be positive");

  ConnectionReport pre = check_connections(f, horizon, orbit_tol);
  if (pre.ok) {
    RepairResult res{f, false, HomeoSpec::identity(f.domain()), Bounds{0.0, 0.0}, pre, 0.0, 0.0};
    return res;
  }

  const double lambda = lipschitz_estimate(f, opts).value;

  // finite orbit segments that h must fix pointwise: f^j(d) for j < n(d),
  // where n(d) is the first breakpoint hit (or the horizon)
  auto near_breakpoint = [&](double x) {
    for (int k = 1; k <= N - 1; ++k)
      if (std::abs(x - f.cut(k)) <= orbit_tol) return true;
    return false;
  };
  std::set<double> dstar;
  for (const DPoint& d : d_set(f)) {
    double x = d.value;
    if (near_breakpoint(x)) continue;  // connection at k = 0: no segment to keep
    dstar.insert(x);
    for (int k = 1; k < horizon; ++k) {
      x = f.eval(std::clamp(x, f.domain().lo, f.domain().hi));
      if (near_breakpoint(x)) break;
      dstar.insert(x);
    }
  }

  // avoid set and search resolution
  std::vector<double> avoid(dstar.begin(), dstar.end());
  for (int k = 1; k <= N - 1; ++k) avoid.push_back(f.cut(k));
  avoid.push_back(f.domain().lo);
  avoid.push_back(f.domain().hi);
  std::sort(avoid.begin(), avoid.end());
  avoid.erase(std::unique(avoid.begin(), avoid.end()), avoid.end());
  double min_geo_gap = 1e308;
  for (std::size_t k = 1; k < avoid.size(); ++k)
    min_geo_gap = std::min(min_geo_gap, avoid[k] - avoid[k - 1]);

  const double budget = std::min(eps / (4.0 * N * (1.0 + lambda)), f.min_piece_length() / 4.0);
  const double eta = std::min(eps / (8.0 * N * (1.0 + lambda)), min_geo_gap / 8.0);
  if (!(eta > 0) || !std::isfinite(eta))
    throw Error("NoRoomToMove", "no usable knot resolution", eta);

  auto clear_of_avoid = [&](double cand) {
    for (double p : avoid)
      if (std::abs(cand - p) < 0.5 * eta) return false;
    return true;
  };
  auto crosses_dstar = [&](double from, double to) {
    double lo = std::min(from, to), hi = std::max(from, to);
    auto it = dstar.upper_bound(lo);
    return it != dstar.end() && *it < hi;
  };

  std::vector<double> deltas;
  for (int i = 1; i <= N - 1; ++i) {
    const double c = f.cut(i);
    bool found = false;
    for (int k = 1; k * eta < budget && k <= (1 << 20); ++k) {
      for (double s : {+1.0, -1.0}) {
        double cand = c + s * k * eta;
        if (!(cand > f.cut(i - 1) && cand < f.cut(i + 1))) continue;
        if (!clear_of_avoid(cand)) continue;
        if (crosses_dstar(c, cand)) continue;
        deltas.push_back(s * k * eta);
        found = true;
        break;
      }
      if (found) break;
    }
    if (!found)
      throw Error("NoRoomToMove",
                  "no admissible displacement for breakpoint " + std::to_string(i) +
                      " at resolution " + format_double(eta),
                  c);
  }

  // assemble h from (moved preimage -> breakpoint) pairs plus fixed knots
  std::vector<std::pair<double, double>> knots;
  knots.emplace_back(f.domain().lo, f.domain().lo);
  knots.emplace_back(f.domain().hi, f.domain().hi);
  for (double d : dstar)
    if (d > f.domain().lo && d < f.domain().hi) knots.emplace_back(d, d);
  for (int i = 1; i <= N - 1; ++i)
    knots.emplace_back(f.cut(i) + deltas[static_cast<std::size_t>(i - 1)], f.cut(i));
  std::sort(knots.begin(), knots.end());
  std::vector<double> hx, hy;
  for (auto& [x, y] : knots) {
    hx.push_back(x);
    hy.push_back(y);
  }
  HomeoSpec h(std::move(hx), std::move(hy));

  std::vector<double> cuts;
  for (int i = 1; i <= N - 1; ++i) cuts.push_back(f.cut(i) + deltas[static_cast<std::size_t>(i - 1)]);
  std::vector<BranchFn> branches;
  for (int k = 1; k <= N; ++k) {
    double lo = k == 1 ? f.domain().lo : cuts[static_cast<std::size_t>(k - 2)];
    double hi = k == N ? f.domain().hi : cuts[static_cast<std::size_t>(k - 1)];
    branches.push_back(warped(f.branch(k), h.restrict(lo, hi)));
  }
  PCMap g = PCMap::create(f.domain(), f.order(), std::move(cuts), std::move(branches));

  ConnectionReport post = check_connections(g, horizon, orbit_tol);
  if (!post.ok)
    throw Error("VerificationFailed",
                "repaired map still has a connection at iterate " +
                    std::to_string(post.first_violation->k),
                post.first_violation->d);
  Bounds comp = comp_metric(f, g, 0, opts);
  if (!(comp.upper < eps))
    throw Error("VerificationFailed",
                "comp^0(f,g) upper " + format_double(comp.upper) + " is not below eps");

  RepairResult res{std::move(g), true, h, comp, std::move(post), eta,
                   h.max_deviation_from_identity()};
  return res;
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

namespace {

ExprPtr affine_ast(double slope, double intercept) {
  return ast::add_const(ast::mul(ast::number(slope), ast::var()), intercept);
}

// a3*t^3 + a1*t + c with t = (x - m)/hl
ExprPtr cubic_ast(double a3, double a1, double c, double m, double hl) {
  ExprPtr t = ast::div(ast::sub(ast::var(), ast::number(m)), ast::number(hl));
  ExprPtr p = ast::add(ast::mul(ast::number(a3), ast::pow(t, 3)),
                       ast::mul(ast::number(a1), t));
  return ast::add_const(p, c);
}

std::vector<double> draw_breakpoints(Rng& rng, const MapGenParams& p) {
  double len = p.domain.length();
  double min_gap = p.min_gap_frac * len;
  for (int tries = 0; tries < 1000; ++tries) {
    std::vector<double> cuts;
    for (int k = 0; k < p.pieces - 1; ++k)
      cuts.push_back(rng.uniform(p.domain.lo + min_gap, p.domain.hi - min_gap));
    std::sort(cuts.begin(), cuts.end());
    bool ok = true;
    double prev = p.domain.lo;
    for (double c : cuts) {
      if (c - prev < min_gap) ok = false;
      prev = c;
    }
    if (p.domain.hi - prev < min_gap) ok = false;
    if (ok) return cuts;
  }
  throw Error("SamplingFailed", "could not draw ordered breakpoints");
}

BranchFn draw_branch(Rng& rng, const MapGenParams& p, const IntervalPair& piece) {
  double len = piece.length();
  if (!p.cubic) {
    double cap = std::min(p.lipschitz_cap, 0.9 * p.domain.length() / len);
    double s = rng.uniform(-cap, cap);
    double vlo = std::min(s * piece.lo, s * piece.hi);
    double vhi = std::max(s * piece.lo, s * piece.hi);
    double b = rng.uniform(p.domain.lo - vlo, p.domain.hi - vhi);
    return BranchFn{affine_ast(s, b), {}};
  }
  double hl = 0.5 * len;
  double m = 0.5 * (piece.lo + piece.hi);
  double a3 = rng.uniform(-1.0, 1.0) * p.lipschitz_cap * hl / 6.0;
  double a1 = rng.uniform(-1.0, 1.0) * p.lipschitz_cap * hl / 2.0;
  double amp = std::abs(a3) + std::abs(a1);
  if (amp > 0.45 * p.domain.length()) {
    double sc = 0.45 * p.domain.length() / amp;
    a3 *= sc;
    a1 *= sc;
    amp *= sc;
  }
  double c = rng.uniform(p.domain.lo + amp, p.domain.hi - amp);
  return BranchFn{cubic_ast(a3, a1, c, m, hl), {}};
}

}  // namespace

PCMap random_map(const MapGenParams& params, std::uint64_t seed) {
  if (params.pieces < 2) throw Error("FormatError", "generator needs N >= 2");
  Rng rng(seed);
  for (int tries = 0; tries < 100; ++tries) {
    std::vector<double> cuts = draw_breakpoints(rng, params);
    std::vector<BranchFn> branches;
    double prev = params.domain.lo;
    for (int k = 0; k < params.pieces; ++k) {
      double hi = k == params.pieces - 1 ? params.domain.hi : cuts[static_cast<std::size_t>(k)];
      branches.push_back(draw_branch(rng, params, {prev, hi}));
      prev = hi;
    }
    try {
      return PCMap::create(params.domain, params.order, std::move(cuts), std::move(branches));
    } catch (const Error&) {
      // range overshoot; redraw
    }
  }
  throw Error("SamplingFailed", "random map generation failed");
}

PCMap random_connected_map(const MapGenParams& params, int horizon, std::uint64_t seed) {
  MapGenParams p = params;
  p.cubic = false;  // exact retuning needs affine branch 1
  Rng rng(seed);
  for (int tries = 0; tries < 200; ++tries) {
    std::uint64_t sub = seed * 1000003u + static_cast<std::uint64_t>(tries) + 1u;
    PCMap base = random_map(p, sub);
    double c0 = base.domain().lo;
    double c1 = base.cut(1);
    double s = base.branch(1).jet(c0, 1)[1];
    bool orbit_hit = rng.coin();
    double intercept = c1 - s * c0;  // f_1(c0) = c_1 directly
    if (orbit_hit && s > 0.1) {
      // d := f_1(c0) lands on c_1 after one more step: s^2 c0 + b(1+s) = c_1
      double b = (c1 - s * s * c0) / (1.0 + s);
      double d = s * c0 + b;
      if (d > c0 + 1e-6 && d < c1 - 1e-6) intercept = b;
    }
    std::vector<BranchFn> branches;
    branches.push_back(BranchFn{affine_ast(s, intercept), {}});
    for (int k = 2; k <= base.piece_count(); ++k) branches.push_back(base.branch(k));
    try {
      PCMap g = PCMap::create(base.domain(), base.order(), base.breakpoints(),
                              std::move(branches));
      if (!check_connections(g, horizon).ok) return g;
    } catch (const Error&) {
      // retune failed the range check; redraw
    }
  }
  throw Error("SamplingFailed", "could not construct a connected map");
}

}  // namespace pcm
