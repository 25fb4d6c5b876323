#pragma once

#include <functional>
#include <optional>

#include "pcm/bounds.hpp"
#include "pcm/pcmap.hpp"

namespace pcm {

// Query for a certified supremum over a compact interval. The kernel samples
// an initial grid, then repeatedly bisects the cell with the largest possible
// excess until the enclosure width drops below tol or the evaluation budget
// runs out. With a valid bound on the objective's slope (derivative_hint) the
// returned Bounds contain the true supremum; without one the slope is
// estimated from the samples, inflated by 1.5 and the result is flagged
// heuristic_upper.
struct SupQuery {
  std::function<double(double)> objective;
  IntervalPair domain;
  long budget = 200000;
  double tol = 1e-9;
  std::optional<double> derivative_hint;
  int initial_samples = 1024;
};

Bounds certified_sup(const SupQuery& q);

}  // namespace pcm
