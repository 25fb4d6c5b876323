#pragma once

#include <functional>

#include "pcm/bounds.hpp"
#include "pcm/pcmap.hpp"
#include "pcm/sup.hpp"

namespace pcm {

// Kernel settings shared by the metric computations; budget and tol apply to
// each individual supremum term.
struct SupOptions {
  long budget = 200000;
  double tol = 1e-9;
  int initial_samples = 1024;
  int threads = 1;
};

// Piecewise comparison: sum of breakpoint displacements plus, for every piece
// i of f and derivative order j <= r, the supremum over the closed piece of
// |f_i^(j)(x) - g_i^(j)(xi_i(f,g;x))|. The g-side factor is the jet
// coefficient of branch i of g at the deformed point, not a derivative of the
// composition. Slope hints for terms with j < r come from the exact (j+1)-
// jets; the order-r terms use the kernel's sampled estimate and mark the
// result heuristic_upper.
Bounds comp_metric(const PCMap& f, const PCMap& g, int r, const SupOptions& opts = {});

// Uniform metric: breakpoint displacements plus, for each j <= r, the
// supremum of |f^(j) - g^(j)| over X minus both breakpoint sets, computed as
// a max over the cells of the common refinement using one-sided extensions.
Bounds dist_inf_metric(const PCMap& f, const PCMap& g, int r, const SupOptions& opts = {});

// A continuous function together with its own compact subinterval domain (an
// element of FI(X;W)).
struct FunctionOnInterval {
  IntervalPair domain;
  std::function<double(double)> fn;
};

// chi(F,G) = Hausdorff distance of the domains plus the supremum over I_F of
// |F(x) - G(xi(x))| with xi the increasing affine bijection I_F -> I_G.
Bounds chi_metric(const FunctionOnInterval& F, const FunctionOnInterval& G,
                  const SupOptions& opts = {});

// The closed-piece extension f_i^(j) as an element of FI(X;R).
FunctionOnInterval branch_function(const PCMap& f, int piece, int deriv);

}  // namespace pcm
