#pragma once

#include <cstdint>

#include "pcm/perturb.hpp"

namespace pcm {

// Monte Carlo probe of how common the no-connections property is among
// random piecewise-Lipschitz maps, and how often a failed sample can be
// repaired within a small comp^0 budget.
struct GenericityParams {
  int samples = 200;
  int horizon = 20;
  std::uint64_t seed = 0;
  MapGenParams gen;
  double repair_eps = 0.01;
};

struct GenericityReport {
  int samples = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  int pass_count = 0;
  int fail_count = 0;
  int repaired_ok = 0;
  int repair_no_room = 0;
  int repair_verification_failed = 0;
  double pass_fraction = 0.0;
  double repair_success_fraction = 0.0;  // over the failures
};

GenericityReport genericity_experiment(const GenericityParams& params);

}  // namespace pcm
