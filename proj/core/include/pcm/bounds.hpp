#pragma once

#include <algorithm>

namespace pcm {

// Certified enclosure of a scalar: the true quantity lies in [lower, upper]
// whenever the slope bound used to produce it was valid. heuristic_upper marks
// enclosures whose slope bound came from sampling rather than exact jets.
struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool heuristic_upper = false;
  bool budget_exhausted = false;

  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }

  Bounds& operator+=(const Bounds& o) {
    lower += o.lower;
    upper += o.upper;
    heuristic_upper |= o.heuristic_upper;
    budget_exhausted |= o.budget_exhausted;
    return *this;
  }

  // enclosure of max(a, b): valid since max is monotone in both arguments
  static Bounds max_of(const Bounds& a, const Bounds& b) {
    return {std::max(a.lower, b.lower), std::max(a.upper, b.upper),
            a.heuristic_upper || b.heuristic_upper,
            a.budget_exhausted || b.budget_exhausted};
  }

  static bool intersect(const Bounds& a, const Bounds& b) {
    return a.lower <= b.upper && b.lower <= a.upper;
  }
};

inline Bounds operator+(Bounds a, const Bounds& b) { return a += b; }

}  // namespace pcm
