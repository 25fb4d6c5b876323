#include "pcm/sup.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "pcm/errors.hpp"

namespace pcm {

namespace {

struct Cell {
  double ub;  // largest value the objective can attain on [lo, hi]
  double lo, hi;
  double vlo, vhi;

  bool operator<(const Cell& o) const {
    if (ub != o.ub) return ub < o.ub;
    if (lo != o.lo) return lo > o.lo;  // deterministic tie-break
    return hi > o.hi;
  }
};

double cell_upper(double lo, double hi, double vlo, double vhi, double slope) {
  // crossing point of the two slope-limited envelopes
  double ub = 0.5 * (vlo + vhi) + 0.5 * slope * (hi - lo);
  return std::max({ub, vlo, vhi});
}

}  // namespace

Bounds certified_sup(const SupQuery& q) {
  if (!(q.domain.hi >= q.domain.lo))
    throw Error("FormatError", "supremum domain is empty");

  const long budget = std::max<long>(q.budget, 64);
  const double tol = q.tol > 0 ? q.tol : 1e-12;
  long evals = 0;

  auto eval = [&](double x) {
    double v = q.objective(x);
    ++evals;
    if (!std::isfinite(v))
      throw Error("NonFiniteObjective", "objective is not finite at " + format_double(x), x);
    return v;
  };

  if (q.domain.length() == 0.0) {
    double v = eval(q.domain.lo);
    return {v, v, false, false};
  }

  int n0 = std::clamp(q.initial_samples, 2, static_cast<int>(budget / 2));
  std::vector<double> xs(static_cast<std::size_t>(n0) + 1);
  std::vector<double> vs(xs.size());
  double h = q.domain.length() / n0;
  double best = -1e308;
  for (int k = 0; k <= n0; ++k) {
    double x = k == n0 ? q.domain.hi : q.domain.lo + k * h;
    xs[static_cast<std::size_t>(k)] = x;
    vs[static_cast<std::size_t>(k)] = eval(x);
    best = std::max(best, vs[static_cast<std::size_t>(k)]);
  }

  bool heuristic = false;
  double slope;
  if (q.derivative_hint) {
    slope = std::abs(*q.derivative_hint);
  } else {
    double est = 0.0;
    for (int k = 1; k <= n0; ++k) {
      double dx = xs[static_cast<std::size_t>(k)] - xs[static_cast<std::size_t>(k - 1)];
      if (dx > 0.0)
        est = std::max(est, std::abs(vs[static_cast<std::size_t>(k)] -
                                     vs[static_cast<std::size_t>(k - 1)]) /
                                dx);
    }
    slope = 1.5 * est;
    heuristic = true;
  }

  std::priority_queue<Cell> heap;
  for (int k = 1; k <= n0; ++k) {
    double lo = xs[static_cast<std::size_t>(k - 1)], hi = xs[static_cast<std::size_t>(k)];
    double vlo = vs[static_cast<std::size_t>(k - 1)], vhi = vs[static_cast<std::size_t>(k)];
    heap.push({cell_upper(lo, hi, vlo, vhi, slope), lo, hi, vlo, vhi});
  }

  const double span = std::max(std::abs(q.domain.lo), std::abs(q.domain.hi));
  const double min_width = std::max(span, 1.0) * 1e-15;

  bool exhausted = false;
  while (!heap.empty() && heap.top().ub > best + tol) {
    if (evals >= budget) {
      exhausted = true;
      break;
    }
    Cell c = heap.top();
    if (c.hi - c.lo <= min_width) break;  // resolution floor; ub is already clamped
    heap.pop();
    double xm = 0.5 * (c.lo + c.hi);
    double vm = eval(xm);
    best = std::max(best, vm);
    heap.push({cell_upper(c.lo, xm, c.vlo, vm, slope), c.lo, xm, c.vlo, vm});
    heap.push({cell_upper(xm, c.hi, vm, c.vhi, slope), xm, c.hi, vm, c.vhi});
  }

  double upper = heap.empty() ? best : std::max(best, heap.top().ub);
  return {best, upper, heuristic, exhausted};
}

}  // namespace pcm
