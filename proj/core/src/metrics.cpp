#include "pcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <vector>

#include "pcm/errors.hpp"

namespace pcm {

namespace {

void check_orders(const PCMap& f, const PCMap& g, int r) {
  if (!f.same_shape(g)) throw Error("ShapeMismatch", "maps must share X and N");
  if (r < 0 || r > std::min(f.order(), g.order()))
    throw Error("OrderTooHigh",
                "metric order " + std::to_string(r) + " exceeds the maps' declared smoothness");
}

double breakpoint_term(const PCMap& f, const PCMap& g) {
  double s = 0.0;
  for (int i = 1; i <= f.piece_count() - 1; ++i) s += std::abs(f.cut(i) - g.cut(i));
  return s;
}

// max over a probe grid of |d/dx (F^(j)(x) - G^(j)(sigma(x)))| from the exact
// (j+1)-jets, inflated for the gaps between probes
double difference_slope_hint(const BranchFn& F, const BranchFn& G, const IntervalPair& from,
                             const IntervalPair& to, int j) {
  const int probes = 65;
  double slope = (to.hi - to.lo) / (from.hi - from.lo);
  double m = 0.0;
  for (int k = 0; k <= probes; ++k) {
    double x = from.lo + (from.hi - from.lo) * k / probes;
    double y = xi_affine(from, to, x);
    double d = F.jet(x, j + 1)[j + 1] - slope * G.jet(y, j + 1)[j + 1];
    m = std::max(m, std::abs(d));
  }
  return 1.25 * m;
}

Bounds sup_term(const BranchFn& F, const BranchFn& G, const IntervalPair& from,
                const IntervalPair& to, int j, bool exact_hint, const SupOptions& opts) {
  SupQuery q;
  q.domain = from;
  q.budget = opts.budget;
  q.tol = opts.tol;
  q.initial_samples = opts.initial_samples;
  q.objective = [&F, &G, from, to, j](double x) {
    double y = xi_affine(from, to, x);
    return std::abs(F.jet(x, j)[j] - G.jet(y, j)[j]);
  };
  if (exact_hint) q.derivative_hint = difference_slope_hint(F, G, from, to, j);
  return certified_sup(q);
}

// run the independent sup terms, optionally fanned out over threads, and sum
// deterministically in index order
Bounds accumulate_terms(std::vector<std::function<Bounds()>> terms, double base,
                        const SupOptions& opts) {
  std::vector<Bounds> results(terms.size());
  if (opts.threads > 1 && terms.size() > 1) {
    std::vector<std::future<Bounds>> futs;
    futs.reserve(terms.size());
    for (auto& t : terms) futs.push_back(std::async(std::launch::async, t));
    for (std::size_t k = 0; k < futs.size(); ++k) results[k] = futs[k].get();
  } else {
    for (std::size_t k = 0; k < terms.size(); ++k) results[k] = terms[k]();
  }
  Bounds total{base, base, false, false};
  for (const Bounds& b : results) total += b;
  return total;
}

}  // namespace

Bounds comp_metric(const PCMap& f, const PCMap& g, int r, const SupOptions& opts) {
  check_orders(f, g, r);
  // split the width target across the N(r+1) sup terms, whose widths add
  SupOptions per_term = opts;
  per_term.tol = opts.tol / (f.piece_count() * (r + 1));
  std::vector<std::function<Bounds()>> terms;
  for (int i = 1; i <= f.piece_count(); ++i) {
    for (int j = 0; j <= r; ++j) {
      const BranchFn& F = f.branch(i);
      const BranchFn& G = g.branch(i);
      IntervalPair from = f.piece_closure(i);
      IntervalPair to = g.piece_closure(i);
      terms.push_back([&F, &G, from, to, j, r, per_term] {
        return sup_term(F, G, from, to, j, /*exact_hint=*/j < r, per_term);
      });
    }
  }
  return accumulate_terms(std::move(terms), breakpoint_term(f, g), opts);
}

Bounds dist_inf_metric(const PCMap& f, const PCMap& g, int r, const SupOptions& opts) {
  check_orders(f, g, r);

  // common refinement of both breakpoint sets
  std::vector<double> cuts;
  for (int i = 0; i <= f.piece_count(); ++i) cuts.push_back(f.cut(i));
  for (int i = 1; i <= g.piece_count() - 1; ++i) cuts.push_back(g.cut(i));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct CellRef {
    IntervalPair cell;
    int piece_f, piece_g;
  };
  std::vector<CellRef> cells;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    IntervalPair cell{cuts[k], cuts[k + 1]};
    if (cell.length() <= 0.0) continue;
    double mid = 0.5 * (cell.lo + cell.hi);
    cells.push_back({cell, f.piece_of(mid), g.piece_of(mid)});
  }

  SupOptions per_term = opts;
  per_term.tol = opts.tol / (r + 1);
  std::vector<std::function<Bounds()>> terms;
  terms.reserve(static_cast<std::size_t>(r + 1));
  for (int j = 0; j <= r; ++j) {
    terms.push_back([&f, &g, &cells, j, r, opts = per_term] {
      Bounds acc{0.0, 0.0, false, false};
      bool first = true;
      for (const CellRef& c : cells) {
        const BranchFn& F = f.branch(c.piece_f);
        const BranchFn& G = g.branch(c.piece_g);
        SupQuery q;
        q.domain = c.cell;
        q.budget = opts.budget;
        q.tol = opts.tol;
        q.initial_samples = opts.initial_samples;
        q.objective = [&F, &G, j](double x) {
          return std::abs(F.jet(x, j)[j] - G.jet(x, j)[j]);
        };
        if (j < r) {
          const int probes = 65;
          double m = 0.0;
          for (int k = 0; k <= probes; ++k) {
            double x = c.cell.lo + c.cell.length() * k / probes;
            m = std::max(m, std::abs(F.jet(x, j + 1)[j + 1] - G.jet(x, j + 1)[j + 1]));
          }
          q.derivative_hint = 1.25 * m;
        }
        Bounds b = certified_sup(q);
        acc = first ? b : Bounds::max_of(acc, b);
        first = false;
      }
      return acc;
    });
  }
  return accumulate_terms(std::move(terms), breakpoint_term(f, g), opts);
}

Bounds chi_metric(const FunctionOnInterval& F, const FunctionOnInterval& G,
                  const SupOptions& opts) {
  if (F.domain.length() <= 0.0 || G.domain.length() <= 0.0)
    throw Error("DegenerateDomain", "chi requires non-degenerate domains");
  double dh = hausdorff_interval(F.domain, G.domain);
  SupQuery q;
  q.domain = F.domain;
  q.budget = opts.budget;
  q.tol = opts.tol;
  q.initial_samples = opts.initial_samples;
  IntervalPair from = F.domain, to = G.domain;
  q.objective = [&F, &G, from, to](double x) {
    return std::abs(F.fn(x) - G.fn(xi_affine(from, to, x)));
  };
  Bounds b = certified_sup(q);
  return {dh + b.lower, dh + b.upper, b.heuristic_upper, b.budget_exhausted};
}

FunctionOnInterval branch_function(const PCMap& f, int piece, int deriv) {
  IntervalPair dom = f.piece_closure(piece);
  const BranchFn& br = f.branch(piece);
  if (deriv < 0 || deriv > f.order())
    throw Error("OrderTooHigh", "derivative order exceeds the declared smoothness");
  return {dom, [br, deriv](double x) { return br.jet(x, deriv)[deriv]; }};
}

}  // namespace pcm
