#include "pcm/critical.hpp"

#include <algorithm>
#include <cmath>

#include "pcm/errors.hpp"
#include "pcm/sup.hpp"

namespace pcm {

namespace {

constexpr int kGrid = 4096;
constexpr double kRootTol = 1e-12;
constexpr double kClusterTol = 1e-9;

double fprime(const BranchFn& br, double x) { return br.jet(x, 1)[1]; }

double bisect_root(const BranchFn& br, double lo, double hi, double vlo) {
  // vlo and the value at hi have opposite signs
  for (int it = 0; it < 200 && hi - lo > kRootTol; ++it) {
    double mid = 0.5 * (lo + hi);
    double vm = fprime(br, mid);
    if (vm == 0.0) return mid;
    if ((vm > 0) == (vlo > 0)) {
      lo = mid;
      vlo = vm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CritReport critical_census(const PCMap& f) {
  if (f.order() < 1)
    throw Error("OrderTooLow", "critical census needs declared smoothness r >= 1");
  CritReport rep;
  rep.grid_density = kGrid;

  for (int i = 1; i <= f.piece_count(); ++i) {
    IntervalPair piece = f.piece_closure(i);
    const BranchFn& br = f.branch(i);
    double h = piece.length() / kGrid;
    std::vector<double> xs(kGrid + 1), vs(kGrid + 1);
    for (int k = 0; k <= kGrid; ++k) {
      xs[static_cast<std::size_t>(k)] = k == kGrid ? piece.hi : piece.lo + k * h;
      vs[static_cast<std::size_t>(k)] = fprime(br, xs[static_cast<std::size_t>(k)]);
    }

    std::vector<double> roots;
    // strict sign changes between grid nodes
    for (int k = 1; k <= kGrid; ++k) {
      double a = vs[static_cast<std::size_t>(k - 1)], b = vs[static_cast<std::size_t>(k)];
      if (a != 0.0 && b != 0.0 && (a > 0) != (b > 0))
        roots.push_back(bisect_root(br, xs[static_cast<std::size_t>(k - 1)],
                                    xs[static_cast<std::size_t>(k)], a));
    }
    // grid nodes where |f'| nearly vanishes: a root when the sign flips
    // around the node, a suspected tangency otherwise
    for (int k = 0; k <= kGrid; ++k) {
      if (std::abs(vs[static_cast<std::size_t>(k)]) >= 1e-10) continue;
      int l = k - 1, r = k + 1;
      while (l >= 0 && std::abs(vs[static_cast<std::size_t>(l)]) < 1e-10) --l;
      while (r <= kGrid && std::abs(vs[static_cast<std::size_t>(r)]) < 1e-10) ++r;
      if (l >= 0 && r <= kGrid &&
          (vs[static_cast<std::size_t>(l)] > 0) != (vs[static_cast<std::size_t>(r)] > 0))
        roots.push_back(xs[static_cast<std::size_t>(k)]);
      else
        rep.suspected_tangencies.push_back(xs[static_cast<std::size_t>(k)]);
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> clustered;
    for (double x : roots) {
      if (!clustered.empty() && x - clustered.back() < kClusterTol) continue;
      clustered.push_back(x);
    }
    for (double x : clustered) {
      // strictly interior per the definition of Crit_int
      if (x - piece.lo < kClusterTol || piece.hi - x < kClusterTol) continue;
      InternalCriticalPoint p;
      p.x = x;
      p.piece = i;
      p.fprime_residual = std::abs(fprime(br, x));
      if (f.order() >= 2) {
        p.fsecond = br.jet(x, 2)[2];
        if (p.fprime_residual < rep.tol_d && std::abs(*p.fsecond) < rep.tol_d)
          rep.degenerate.push_back(x);
      }
      rep.internal.push_back(p);
    }
  }

  // one-sided derivatives at c0, the interior breakpoints, and cN
  rep.boundary.push_back({f.cut(0), 1, fprime(f.branch(1), f.cut(0))});
  for (int j = 1; j <= f.piece_count() - 1; ++j) {
    rep.boundary.push_back({f.cut(j), j, fprime(f.branch(j), f.cut(j))});
    rep.boundary.push_back({f.cut(j), j + 1, fprime(f.branch(j + 1), f.cut(j))});
  }
  rep.boundary.push_back(
      {f.cut(f.piece_count()), f.piece_count(), fprime(f.branch(f.piece_count()), f.cut(f.piece_count()))});
  return rep;
}

namespace {

// lower bound of min |coefficient j| over [lo, hi] via the sup kernel
double certified_min_abs(const BranchFn& br, int j, double lo, double hi,
                         const SupOptions& opts) {
  SupQuery q;
  q.domain = {lo, hi};
  q.budget = opts.budget;
  q.tol = opts.tol;
  q.initial_samples = std::min(opts.initial_samples, 512);
  q.objective = [&br, j](double x) { return -std::abs(br.jet(x, j)[j]); };
  return -certified_sup(q).upper;
}

}  // namespace

RadiusCertificate critical_radius(const PCMap& f, const SupOptions& opts) {
  if (f.order() < 2)
    throw Error("OrderTooLow", "the radius certificate needs r >= 2");
  CritReport census = critical_census(f);
  if (!census.degenerate.empty())
    throw Error("DegenerateCritical",
                "census found a degenerate critical point", census.degenerate.front());

  // hypothesis |f'| + |f''| > 0 on every closed piece
  const double tol_s = 1e-6;
  for (int i = 1; i <= f.piece_count(); ++i) {
    IntervalPair piece = f.piece_closure(i);
    const BranchFn& br = f.branch(i);
    for (int k = 0; k <= kGrid; ++k) {
      double x = k == kGrid ? piece.hi : piece.lo + k * piece.length() / kGrid;
      Jet j2 = br.jet(x, 2);
      if (std::abs(j2[1]) + std::abs(j2[2]) <= tol_s)
        throw Error("HypothesisFails", "|f'| + |f''| vanishes near " + format_double(x), x);
    }
  }

  RadiusCertificate cert;
  double min_away = 1e308;
  double min_near = 1e308;
  bool has_internal = false;

  for (int i = 1; i <= f.piece_count(); ++i) {
    IntervalPair piece = f.piece_closure(i);
    const BranchFn& br = f.branch(i);
    std::vector<IntervalPair> holes;
    for (const auto& p : census.internal) {
      if (p.piece != i) continue;
      has_internal = true;
      double delta = 0.0;
      for (double cand : {piece.length() / 8, piece.length() / 16, piece.length() / 32,
                          piece.length() / 64}) {
        double lo = std::max(piece.lo, p.x - cand);
        double hi = std::min(piece.hi, p.x + cand);
        double m2 = certified_min_abs(br, 2, lo, hi, opts);
        if (m2 > 0) {
          delta = cand;
          min_near = std::min(min_near, m2);
          break;
        }
      }
      if (delta == 0.0)
        throw Error("DegenerateCritical",
                    "no neighborhood of " + format_double(p.x) + " certifies |f''| > 0", p.x);
      cert.delta = std::max(cert.delta, delta);
      holes.push_back({std::max(piece.lo, p.x - delta), std::min(piece.hi, p.x + delta)});
    }
    // complement of the holes inside the closed piece
    std::sort(holes.begin(), holes.end(),
              [](const IntervalPair& a, const IntervalPair& b) { return a.lo < b.lo; });
    double cursor = piece.lo;
    for (const auto& hole : holes) {
      if (hole.lo > cursor) min_away = std::min(min_away, certified_min_abs(br, 1, cursor, hole.lo, opts));
      cursor = std::max(cursor, hole.hi);
    }
    if (cursor < piece.hi) min_away = std::min(min_away, certified_min_abs(br, 1, cursor, piece.hi, opts));
  }

  cert.min_fprime_away = min_away;
  if (has_internal) cert.min_fsecond_near = min_near;
  double bound = has_internal ? std::min(min_away, min_near) : min_away;
  if (!(bound > 0))
    throw Error("HypothesisFails", "could not certify a positive radius", bound);
  cert.radius = 0.5 * bound;
  cert.heuristic = true;
  return cert;
}

}  // namespace pcm
