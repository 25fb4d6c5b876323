#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"

namespace pcm {

// One-sided limit value of f at a breakpoint (or the left endpoint), with its
// provenance: source cut index j in [0, N-1] and branch side s.
struct DPoint {
  double value;
  int source;  // j: 0 = left endpoint c0, 1..N-1 = interior breakpoints
  int side;    // branch index s producing the one-sided limit
};

// D_f = { f_s(c_j) : s in {j, j+1}, 0 <= j <= N-1 } with s clamped to valid
// branches; j = 0 contributes only f_1(c_0). Duplicate values keep their
// distinct provenance, so the list always has 2N-1 entries.
std::vector<DPoint> d_set(const PCMap& f);

struct Violation {
  double d;           // orbit start
  int k;              // iterate at which the orbit met a breakpoint
  double breakpoint;  // the breakpoint hit
};

struct ConnectionReport {
  bool ok = false;
  int horizon = 0;
  double orbit_tol = 0.0;
  std::vector<DPoint> d_points;
  std::vector<std::vector<double>> orbits;  // per d point, f^k(d) as far as computed
  std::optional<Violation> first_violation;
  double min_gap = 0.0;  // min over computed orbit points of dist(., Delta_f)
};

// Certifies g^k(D_f) does not meet Delta_f for k < horizon. An orbit point
// within orbit_tol of a breakpoint counts as a violation.
ConnectionReport check_connections(const PCMap& f, int horizon, double orbit_tol = 1e-11);

struct LipschitzEstimate {
  double value = 0.0;
  bool certified = false;
  std::string method;  // "jet-sup" or "difference-quotient"
};

// r >= 1: max over pieces of the certified supremum of |f'|; r = 0: grid
// difference quotients inflated by 1.1.
LipschitzEstimate lipschitz_estimate(const PCMap& f, const SupOptions& opts = {});

struct ConnectionRadius {
  double epsilon = 0.0;
  bool degenerate = false;  // min_gap at orbit-tolerance resolution
};

// epsilon = min_gap / (4 * sum_{j<horizon} lambda^j); any comp^0-perturbation
// strictly inside it preserves the no-connections property to the horizon.
ConnectionRadius connection_radius(const PCMap& f, int horizon, const LipschitzEstimate& lambda,
                                   double orbit_tol = 1e-11);

// Orbit shadowing data for a pair with comp(f,g) < eps: checks
// |f^k(f_s(c_i^f)) - xi(g,f; g^k(g_s(c_i^g)))| < 2 eps sum_{j<=k} lambda^j and
// that matched points lie in the same-index piece of f, for interior
// breakpoints i and k < horizon.
struct ShadowingReport {
  bool ok = true;
  double max_ratio = 0.0;  // max over checked points of |deviation| / bound
  std::optional<double> first_mismatch_x;
};

ShadowingReport shadowing_check(const PCMap& f, const PCMap& g, int horizon, double lambda,
                                double eps);

}  // namespace pcm
