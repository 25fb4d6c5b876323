#include "pcm/connections.hpp"

#include <algorithm>
#include <cmath>

#include "pcm/errors.hpp"

namespace pcm {

namespace {

double dist_to_breakpoints(const PCMap& f, double x) {
  double m = 1e308;
  for (int i = 1; i <= f.piece_count() - 1; ++i) m = std::min(m, std::abs(x - f.cut(i)));
  return m;
}

double nearest_breakpoint(const PCMap& f, double x) {
  double best = f.cut(1);
  for (int i = 2; i <= f.piece_count() - 1; ++i)
    if (std::abs(x - f.cut(i)) < std::abs(x - best)) best = f.cut(i);
  return best;
}

double step(const PCMap& f, double x) {
  // range validation allows a tau-sized overshoot of X
  return f.eval(std::clamp(x, f.domain().lo, f.domain().hi));
}

}  // namespace

std::vector<DPoint> d_set(const PCMap& f) {
  std::vector<DPoint> out;
  const int N = f.piece_count();
  out.push_back({f.branch_value(1, 0, f.cut(0)), 0, 1});
  for (int j = 1; j <= N - 1; ++j) {
    out.push_back({f.branch_value(j, 0, f.cut(j)), j, j});
    out.push_back({f.branch_value(j + 1, 0, f.cut(j)), j, j + 1});
  }
  return out;
}

ConnectionReport check_connections(const PCMap& f, int horizon, double orbit_tol) {
  if (horizon < 1) throw Error("FormatError", "horizon must be >= 1");
  ConnectionReport rep;
  rep.horizon = horizon;
  rep.orbit_tol = orbit_tol;
  rep.d_points = d_set(f);
  rep.min_gap = 1e308;
  rep.ok = true;

  for (const DPoint& d : rep.d_points) {
    std::vector<double> orbit;
    double x = d.value;
    for (int k = 0; k < horizon; ++k) {
      orbit.push_back(x);
      double gap = dist_to_breakpoints(f, x);
      rep.min_gap = std::min(rep.min_gap, gap);
      if (gap <= orbit_tol) {
        rep.ok = false;
        if (!rep.first_violation) rep.first_violation = Violation{d.value, k, nearest_breakpoint(f, x)};
        break;
      }
      if (k + 1 < horizon) x = step(f, x);
    }
    rep.orbits.push_back(std::move(orbit));
  }
  return rep;
}

LipschitzEstimate lipschitz_estimate(const PCMap& f, const SupOptions& opts) {
  LipschitzEstimate est;
  if (f.order() >= 1) {
    est.certified = true;
    est.method = "jet-sup";
    double m = 0.0;
    for (int i = 1; i <= f.piece_count(); ++i) {
      const BranchFn& br = f.branch(i);
      SupQuery q;
      q.domain = f.piece_closure(i);
      q.budget = opts.budget;
      q.tol = opts.tol;
      q.initial_samples = opts.initial_samples;
      q.objective = [&br](double x) { return std::abs(br.jet(x, 1)[1]); };
      m = std::max(m, certified_sup(q).upper);
    }
    est.value = m;
  } else {
    est.certified = false;
    est.method = "difference-quotient";
    const int grid = 4096;
    double m = 0.0;
    for (int i = 1; i <= f.piece_count(); ++i) {
      IntervalPair piece = f.piece_closure(i);
      const BranchFn& br = f.branch(i);
      double h = piece.length() / grid;
      double prev = br.value(piece.lo);
      for (int k = 1; k <= grid; ++k) {
        double x = k == grid ? piece.hi : piece.lo + k * h;
        double v = br.value(x);
        m = std::max(m, std::abs(v - prev) / h);
        prev = v;
      }
    }
    est.value = 1.1 * m;
  }
  return est;
}

ConnectionRadius connection_radius(const PCMap& f, int horizon, const LipschitzEstimate& lambda,
                                   double orbit_tol) {
  ConnectionReport rep = check_connections(f, horizon, orbit_tol);
  if (!rep.ok)
    throw Error("HasConnections",
                "map has a connection at iterate " + std::to_string(rep.first_violation->k));
  if (rep.min_gap <= 2.0 * orbit_tol) return {0.0, true};
  double lam = std::max(lambda.value, 1e-12);
  double denom = 0.0, p = 1.0;
  for (int j = 0; j < horizon; ++j) {
    denom += p;
    p *= lam;
  }
  return {rep.min_gap / (4.0 * denom), false};
}

ShadowingReport shadowing_check(const PCMap& f, const PCMap& g, int horizon, double lambda,
                                double eps) {
  if (!f.same_shape(g)) throw Error("ShapeMismatch", "maps must share X and N");
  ShadowingReport rep;
  for (int i = 1; i <= f.piece_count() - 1; ++i) {
    for (int s : {i, i + 1}) {
      double xf = f.branch_value(s, 0, f.cut(i));
      double xg = g.branch_value(s, 0, g.cut(i));
      double bound = 0.0, lam_pow = 1.0;
      for (int k = 0; k < horizon; ++k) {
        bound += 2.0 * eps * lam_pow;
        lam_pow *= lambda;
        double matched = xi_deform(g, f, xg);
        double dev = std::abs(xf - matched);
        rep.max_ratio = std::max(rep.max_ratio, dev / bound);
        if (dev >= bound) {
          rep.ok = false;
          if (!rep.first_mismatch_x) rep.first_mismatch_x = xf;
        }
        // matched orbit points must lie in the same piece of f
        if (!f.is_breakpoint(xf) && !f.is_breakpoint(matched)) {
          if (f.piece_of(xf) != f.piece_of(matched)) {
            rep.ok = false;
            if (!rep.first_mismatch_x) rep.first_mismatch_x = xf;
          }
        }
        if (k + 1 < horizon) {
          if (f.is_breakpoint(xf) || g.is_breakpoint(xg)) {
            rep.ok = false;
            if (!rep.first_mismatch_x) rep.first_mismatch_x = xf;
            break;
          }
          xf = step(f, xf);
          xg = step(g, xg);
        }
      }
    }
  }
  return rep;
}

}  // namespace pcm
