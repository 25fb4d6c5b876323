#pragma once

#include <optional>
#include <vector>

#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"

namespace pcm {

struct InternalCriticalPoint {
  double x;
  int piece;
  double fprime_residual;           // |f'(x)| at the reported root
  std::optional<double> fsecond;    // populated when r >= 2
};

struct BoundaryDerivative {
  double c;       // a breakpoint or domain endpoint
  int branch;     // side the one-sided derivative comes from
  double fprime;  // f_s'(c)
};

// Census of Crit(f): sign-bracketed roots of f' inside pieces (bisected to
// 1e-12 and clustered at 1e-9) plus the one-sided boundary derivatives.
// Near-zero |f'| without a sign change is reported as a suspected tangency
// and not counted.
struct CritReport {
  std::vector<InternalCriticalPoint> internal;
  std::vector<BoundaryDerivative> boundary;
  std::vector<double> degenerate;  // x with |f'| and |f''| both below tol_d
  std::vector<double> suspected_tangencies;
  int grid_density = 0;
  double tol_d = 1e-6;
};

CritReport critical_census(const PCMap& f);

// Empirical robustness radius for the critical-point count:
// radius = 0.5 * min( min |f'| off the delta-neighborhoods of internal
// critical points, min |f''| on those neighborhoods ). Always heuristic: the
// compactness constant of the underlying argument is not computable.
struct RadiusCertificate {
  double radius = 0.0;
  double min_fprime_away = 0.0;
  std::optional<double> min_fsecond_near;
  double delta = 0.0;
  bool heuristic = true;
};

RadiusCertificate critical_radius(const PCMap& f, const SupOptions& opts = {});

}  // namespace pcm
