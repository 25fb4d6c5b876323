#pragma once

#include <cstdint>

#include "pcm/connections.hpp"
#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"

namespace pcm {

// Increasing piecewise-linear homeomorphism of X given by its knots.
using HomeoSpec = PiecewiseAffine;

// Moves breakpoint i to a and the adjacent one-sided limit to b by composing
// every branch with the inverse piece deformation and shifting the touched
// branch; c_i^g = a and the one-sided limit equal b exactly, and
// comp^0(f,g) < eps (verified). With right_limit the limit from the right of
// a is pinned instead (mirrored variant of the same construction).
PCMap perturb_breakpoint(const PCMap& f, int i, double a, double b, double eps,
                         bool right_limit = false, const SupOptions& opts = {});

// Seeded sample from the comp^r ball of radius eps around f: jittered
// breakpoints within eps/(4N), branch reparametrization, independent constant
// shifts within eps/(4N(r+1)); the comp bound is verified, retrying up to 16
// times with halved jitter.
PCMap random_neighbor(const PCMap& f, double eps, std::uint64_t seed,
                      const SupOptions& opts = {});

struct RepairResult {
  PCMap map;
  bool changed = false;
  HomeoSpec h;
  Bounds comp0;               // comp^0(f, g)
  ConnectionReport post;      // check at the requested horizon
  double eta = 0.0;           // knot search resolution
  double max_deviation = 0.0;  // max |h(x) - x|
};

// Connection repair g = f o h: h fixes the finite orbit segments of D_f
// (knots at those points) and moves each breakpoint preimage to
// c_i + delta_i, with delta_i the smallest admissible multiple of eta
// (positive direction preferred on ties). The output is verified: it passes
// check_connections at the horizon and comp^0(f,g) < eps, otherwise
// Error("VerificationFailed"). Error("NoRoomToMove") when the avoid set is
// too crowded at resolution eta.
RepairResult repair_connections(const PCMap& f, int horizon, double eps, std::uint64_t seed,
                                const SupOptions& opts = {});

// Random piecewise-Lipschitz map generator used by sampling experiments.
struct MapGenParams {
  IntervalPair domain{0.0, 1.0};
  int pieces = 2;
  int order = 0;
  double lipschitz_cap = 2.0;
  bool cubic = false;          // affine branches otherwise
  double min_gap_frac = 0.05;  // minimal piece length as a fraction of |X|
};

PCMap random_map(const MapGenParams& params, std::uint64_t seed);

// Same generator but with one branch retuned so that an orbit of D_f lands on
// a breakpoint within the horizon (a map **with** connections).
PCMap random_connected_map(const MapGenParams& params, int horizon, std::uint64_t seed);

}  // namespace pcm
