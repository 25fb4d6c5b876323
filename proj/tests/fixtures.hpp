#pragma once

// Shared fixture maps and brute-force oracles for the test suites.

#include <cmath>
#include <string>
#include <vector>

#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"

namespace fixtures {

using pcm::PCMap;

// Two half-slope affine branches with a jump at 1/2.
inline PCMap fig1_f() {
  return PCMap::from_exprs({0.0, 1.0}, 1, {0.5}, {"x/2 + 1/2", "x/2 - 1/4"});
}

// Same shape with the breakpoint at n/(2(n+2)); the graphs converge to
// fig1_f's graph while the uniform distance stays >= 1/2.
inline PCMap fig1_fn(int n) {
  double c = static_cast<double>(n) / (2.0 * (n + 2));
  std::string b1 = "x/2 + " + std::to_string(n + 4) + "/" + std::to_string(2 * (n + 2));
  std::string b2 = "x/2 - " + std::to_string(n) + "/" + std::to_string(4 * (n + 2));
  return PCMap::from_exprs({0.0, 1.0}, 1, {c}, {b1, b2});
}

// Cauchy-but-collapsing family: breakpoint 1/n.
inline PCMap ex34_fn(int n) {
  return PCMap::from_exprs({0.0, 1.0}, 0, {1.0 / n}, {"x/2", "x/2 + 1/2"});
}

// Cauchy w.r.t. the uniform metric: breakpoint 2^-(n+1), slope 2^-n.
inline PCMap ex21_fn(int n) {
  double c = std::ldexp(1.0, -(n + 1));
  std::string b1 = n == 0 ? "x" : "x/2^" + std::to_string(n);
  return PCMap::from_exprs({0.0, 1.0}, 0, {c}, {b1, "0"});
}

inline PCMap doubling() {
  return PCMap::from_exprs({0.0, 1.0}, 1, {0.5}, {"2*x", "2*x - 1"});
}

inline PCMap contracting() {
  return PCMap::from_exprs({0.0, 1.0}, 1, {0.5}, {"x/3 + 0.1", "x/3 + 0.05"});
}

// One non-degenerate internal critical point at 1/4 (f'' = -4 there), affine
// second branch with nonzero boundary derivatives.
inline PCMap quadratic_map() {
  return PCMap::from_exprs({0.0, 1.0}, 2, {0.5}, {"-2*(x - 0.25)^2 + 0.5", "x/2 - 0.25"});
}

// Containment up to the roundoff of summing the metric terms.
inline bool contains_tol(const pcm::Bounds& b, double v, double tol = 1e-12) {
  return b.lower <= v + tol && b.upper >= v - tol;
}

// ---------------------------------------------------------------------------
// brute-force oracles
// ---------------------------------------------------------------------------

// Hausdorff distance between compact intervals via the max-min definition on
// dense grids.
inline double hausdorff_oracle(pcm::IntervalPair I, pcm::IntervalPair J, int grid = 10000) {
  auto one_sided = [grid](pcm::IntervalPair A, pcm::IntervalPair B) {
    double worst = 0.0;
    for (int k = 0; k <= grid; ++k) {
      double x = A.lo + (A.hi - A.lo) * k / grid;
      double best = 1e308;
      for (int l = 0; l <= grid; ++l) {
        double y = B.lo + (B.hi - B.lo) * l / grid;
        best = std::min(best, std::abs(x - y));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(I, J), one_sided(J, I));
}

// Dense-grid evaluation of the piecewise-comparison sum (metric definition
// evaluated directly, no kernel).
inline double comp_grid_oracle(const PCMap& f, const PCMap& g, int r, int grid_per_piece) {
  double total = 0.0;
  for (int i = 1; i <= f.piece_count() - 1; ++i) total += std::abs(f.cut(i) - g.cut(i));
  for (int i = 1; i <= f.piece_count(); ++i) {
    pcm::IntervalPair from = f.piece_closure(i);
    pcm::IntervalPair to = g.piece_closure(i);
    for (int j = 0; j <= r; ++j) {
      double m = 0.0;
      for (int k = 0; k <= grid_per_piece; ++k) {
        double x = k == grid_per_piece ? from.hi : from.lo + from.length() * k / grid_per_piece;
        double y = pcm::xi_affine(from, to, x);
        m = std::max(m, std::abs(f.branch(i).jet(x, j)[j] - g.branch(i).jet(y, j)[j]));
      }
      total += m;
    }
  }
  return total;
}

// Dense-grid evaluation of the uniform-metric sum over the common refinement.
inline double dist_grid_oracle(const PCMap& f, const PCMap& g, int r, int grid_per_cell) {
  double total = 0.0;
  for (int i = 1; i <= f.piece_count() - 1; ++i) total += std::abs(f.cut(i) - g.cut(i));
  std::vector<double> cuts;
  for (int i = 0; i <= f.piece_count(); ++i) cuts.push_back(f.cut(i));
  for (int i = 1; i <= g.piece_count() - 1; ++i) cuts.push_back(g.cut(i));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (int j = 0; j <= r; ++j) {
    double m = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      if (cuts[c + 1] - cuts[c] <= 0.0) continue;
      double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      int pf = f.piece_of(mid), pg = g.piece_of(mid);
      for (int k = 0; k <= grid_per_cell; ++k) {
        double x = cuts[c] + (cuts[c + 1] - cuts[c]) * k / grid_per_cell;
        m = std::max(m, std::abs(f.branch(pf).jet(x, j)[j] - g.branch(pg).jet(x, j)[j]));
      }
    }
    total += m;
  }
  return total;
}

}  // namespace fixtures
