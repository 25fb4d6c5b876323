#pragma once

#include <cstdint>
#include <vector>

#include "pcm/pcmap.hpp"

namespace pcm {

// Row-stochastic Ulam discretization of the transfer operator over a uniform
// partition refined by the breakpoints (so cell boundaries contain Delta_f
// exactly and sample points never meet it). Rows come from stratified
// interior sampling, or from exact preimage intervals when every branch is
// affine and unwarped.
struct UlamOperator {
  std::vector<double> edges;   // cells() + 1 boundaries
  std::vector<double> matrix;  // row-major, cells() x cells()
  int samples_per_cell = 0;
  std::uint64_t seed = 0;
  bool exact = false;

  int cells() const { return static_cast<int>(edges.size()) - 1; }
  double entry(int a, int b) const {
    return matrix[static_cast<std::size_t>(a) * static_cast<std::size_t>(cells()) +
                  static_cast<std::size_t>(b)];
  }
};

UlamOperator ulam_operator(const PCMap& f, int k, int Q = 64, std::uint64_t seed = 0);

struct MeasureVector {
  std::vector<double> weights;  // nonnegative, summing to 1
};

struct StationaryResult {
  MeasureVector measure;
  double residual = 0.0;         // ||mu P - mu||_1 with the undamped matrix
  double residual_damped = 0.0;  // same with the damped chain actually iterated
  long iterations = 0;
  bool converged = false;
};

// Power iteration from the uniform vector on the 1e-8-damped chain; the
// damping guarantees a unique stationary vector. Non-convergence at the
// iteration cap is reported, not thrown.
StationaryResult stationary_measure(const UlamOperator& op, double tol = 1e-12,
                                    long max_iter = 100000);

// ||mu P - mu||_1 recomputed independently of the solver.
double invariance_residual(const MeasureVector& mu, const UlamOperator& op);

}  // namespace pcm
