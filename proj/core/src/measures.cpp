#include "pcm/measures.hpp"

#include <algorithm>
#include <cmath>

#include "pcm/errors.hpp"
#include "pcm/rng.hpp"

namespace pcm {

namespace {

int locate_cell(const std::vector<double>& edges, double y) {
  // half-open cells [e_b, e_{b+1}), last cell closed
  int n = static_cast<int>(edges.size()) - 1;
  if (y <= edges.front()) return 0;
  if (y >= edges.back()) return n - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), y);
  return std::clamp(static_cast<int>(it - edges.begin()) - 1, 0, n - 1);
}

bool all_affine(const PCMap& f) {
  for (int i = 1; i <= f.piece_count(); ++i) {
    const BranchFn& br = f.branch(i);
    if (br.warp || !is_affine(br.ast)) return false;
  }
  return true;
}

}  // namespace

UlamOperator ulam_operator(const PCMap& f, int k, int Q, std::uint64_t seed) {
  if (k < 2) throw Error("FormatError", "Ulam partition needs k >= 2 cells");
  if (Q < 1) throw Error("FormatError", "Ulam sampling needs Q >= 1");

  UlamOperator op;
  op.samples_per_cell = Q;
  op.seed = seed;
  op.exact = all_affine(f);

  const double lo = f.domain().lo, hi = f.domain().hi;
  std::vector<double> edges;
  for (int j = 0; j <= k; ++j) edges.push_back(j == k ? hi : lo + (hi - lo) * j / k);
  for (int i = 1; i <= f.piece_count() - 1; ++i) edges.push_back(f.cut(i));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  op.edges = edges;

  const int n = op.cells();
  op.matrix.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);

  for (int a = 0; a < n; ++a) {
    double* row = &op.matrix[static_cast<std::size_t>(a) * static_cast<std::size_t>(n)];
    double clo = edges[static_cast<std::size_t>(a)], chi = edges[static_cast<std::size_t>(a) + 1];
    // every cell is interior to one closed piece (edges contain Delta_f)
    int piece = f.piece_of(0.5 * (clo + chi));
    const BranchFn& br = f.branch(piece);

    if (op.exact) {
      double vlo = br.value(clo), vhi = br.value(chi);
      double ilo = std::min(vlo, vhi), ihi = std::max(vlo, vhi);
      if (ihi - ilo <= 0.0) {
        row[locate_cell(edges, ilo)] = 1.0;
      } else {
        for (int b = 0; b < n; ++b) {
          double overlap = std::min(ihi, edges[static_cast<std::size_t>(b) + 1]) -
                           std::max(ilo, edges[static_cast<std::size_t>(b)]);
          if (overlap > 0.0) row[b] = overlap / (ihi - ilo);
        }
      }
    } else {
      Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(a + 1));
      double w = chi - clo;
      for (int q = 0; q < Q; ++q) {
        double u = rng.uniform(-0.4, 0.4);
        double x = clo + w * (q + 0.5 + u) / Q;
        double y = std::clamp(br.value(x), lo, hi);
        row[locate_cell(edges, y)] += 1.0;
      }
      for (int b = 0; b < n; ++b) row[b] /= Q;
    }

    double sum = 0.0;
    for (int b = 0; b < n; ++b) sum += row[b];
    if (sum > 0.0 && sum != 1.0)
      for (int b = 0; b < n; ++b) row[b] /= sum;
  }
  return op;
}

namespace {

std::vector<double> mu_times_p(const UlamOperator& op, const std::vector<double>& mu) {
  int n = op.cells();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int a = 0; a < n; ++a) {
    double w = mu[static_cast<std::size_t>(a)];
    if (w == 0.0) continue;
    const double* row = &op.matrix[static_cast<std::size_t>(a) * static_cast<std::size_t>(n)];
    for (int b = 0; b < n; ++b) out[static_cast<std::size_t>(b)] += w * row[b];
  }
  return out;
}

double l1_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

}  // namespace

StationaryResult stationary_measure(const UlamOperator& op, double tol, long max_iter) {
  const int n = op.cells();
  const double gamma = 1e-8;
  const double u = 1.0 / n;

  // the lazy kernel (P + I)/2 has the same stationary vectors as P and is
  // aperiodic, so power iteration converges even when orbits cycle
  auto lazy_step = [&](const std::vector<double>& v, double g) {
    std::vector<double> next = mu_times_p(op, v);
    for (int b = 0; b < n; ++b) {
      double lazy = 0.5 * (next[static_cast<std::size_t>(b)] + v[static_cast<std::size_t>(b)]);
      next[static_cast<std::size_t>(b)] = (1.0 - g) * lazy + g * u;
    }
    double sum = 0.0;
    for (double w : next) sum += w;
    if (sum > 0.0 && sum != 1.0)
      for (double& w : next) w /= sum;
    return next;
  };

  StationaryResult res;
  std::vector<double> mu(static_cast<std::size_t>(n), u);
  for (long it = 1; it <= max_iter; ++it) {
    std::vector<double> next = lazy_step(mu, gamma);
    double rd = l1_diff(next, mu);
    mu = std::move(next);
    res.iterations = it;
    res.residual_damped = rd;
    if (rd <= tol) {
      res.converged = true;
      break;
    }
  }

  // polish away the O(gamma) bias with undamped lazy steps, keeping the best
  // iterate
  std::vector<double> best = mu;
  double best_res = l1_diff(mu_times_p(op, mu), mu);
  int stale = 0;
  for (long it = 0; it < max_iter / 10 && best_res > tol && stale < 8; ++it) {
    mu = lazy_step(mu, 0.0);
    double r = l1_diff(mu_times_p(op, mu), mu);
    ++res.iterations;
    if (r < best_res) {
      best_res = r;
      best = mu;
      stale = 0;
    } else {
      ++stale;
    }
  }
  res.measure.weights = best;
  res.residual = best_res;
  return res;
}

double invariance_residual(const MeasureVector& mu, const UlamOperator& op) {
  const int n = op.cells();
  if (static_cast<int>(mu.weights.size()) != n)
    throw Error("ShapeMismatch", "measure and operator disagree on the cell count");
  double s = 0.0;
  for (int b = 0; b < n; ++b) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      acc += mu.weights[static_cast<std::size_t>(a)] * op.entry(a, b);
    s += std::abs(acc - mu.weights[static_cast<std::size_t>(b)]);
  }
  return s;
}

}  // namespace pcm
