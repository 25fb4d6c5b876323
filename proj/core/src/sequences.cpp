#include "pcm/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pcm/errors.hpp"

namespace pcm {

MapSequence::MapSequence(std::vector<PCMap> maps) : maps_(std::move(maps)) {
  if (maps_.size() < 2) throw Error("TooShort", "a map sequence needs at least two elements");
  for (std::size_t n = 1; n < maps_.size(); ++n) {
    if (!maps_[0].same_shape(maps_[n]) || maps_[0].order() != maps_[n].order())
      throw Error("ShapeMismatch", "sequence elements must share X, N and order");
  }
}

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("FormatError", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

MapSequence MapSequence::from_directory(const std::filesystem::path& dir,
                                        const LoadOptions& opts) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pcm")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<PCMap> maps;
  for (const auto& p : files) maps.push_back(PCMap::load(read_file(p), opts));
  return MapSequence(std::move(maps));
}

MapSequence MapSequence::from_manifest(const std::filesystem::path& manifest,
                                       const LoadOptions& opts) {
  std::istringstream in(read_file(manifest));
  std::vector<PCMap> maps;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    std::filesystem::path p = line.substr(b, e - b + 1);
    if (p.is_relative()) p = manifest.parent_path() / p;
    maps.push_back(PCMap::load(read_file(p), opts));
  }
  return MapSequence(std::move(maps));
}

std::vector<std::vector<Bounds>> pairwise_comp(const MapSequence& seq, int r,
                                               const SupOptions& opts) {
  const int M = seq.size();
  std::vector<std::vector<Bounds>> mat(static_cast<std::size_t>(M),
                                       std::vector<Bounds>(static_cast<std::size_t>(M)));
  for (int a = 0; a < M; ++a) {
    for (int b = a; b < M; ++b) {
      Bounds v = comp_metric(seq.at(a), seq.at(b), r, opts);
      mat[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
      mat[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = v;
    }
  }
  return mat;
}

CollapseReport collapse_estimate(const MapSequence& seq, double tol_c, int window) {
  const int M = seq.size();
  if (M < window)
    throw Error("TooShort", "collapse estimation needs at least " + std::to_string(window) +
                                " sequence elements");
  CollapseReport rep;
  rep.tol_c = tol_c;
  rep.window = window;
  const int N = seq.at(0).piece_count();
  for (int i = 1; i <= N; ++i) {
    CollapseReport::PerPiece pp;
    for (int n = 0; n < M; ++n)
      pp.lengths.push_back(seq.at(n).cut(i) - seq.at(n).cut(i - 1));
    double last = pp.lengths.back();
    bool nonincreasing = true;
    double window_min = last;
    for (int n = M - window; n < M; ++n) {
      double len = pp.lengths[static_cast<std::size_t>(n)];
      window_min = std::min(window_min, len);
      if (n > M - window &&
          len > pp.lengths[static_cast<std::size_t>(n - 1)] + 1e-15 * std::abs(len))
        nonincreasing = false;
    }
    if (last < tol_c && nonincreasing)
      pp.flag = PieceTrend::Collapsing;
    else if (window_min >= 10.0 * tol_c)
      pp.flag = PieceTrend::Stable;
    else
      pp.flag = PieceTrend::Inconclusive;
    if (pp.flag == PieceTrend::Collapsing) ++rep.kappa_hat;
    rep.per_piece.push_back(std::move(pp));
  }
  return rep;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const BranchFn& br, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = br.jet(lm, 1)[1], frm = br.jet(rm, 1)[1];
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(br, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(br, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_derivative(const BranchFn& br, double a, double b, double tol) {
  if (a == b) return 0.0;
  double fa = br.jet(a, 1)[1];
  double fb = br.jet(b, 1)[1];
  double fm = br.jet(0.5 * (a + b), 1)[1];
  double whole = simpson(a, b, fa, fm, fb);
  return adaptive_simpson(br, a, b, fa, fm, fb, whole, tol, 24);
}

}  // namespace

LimitEstimate limit_estimate(const MapSequence& seq, int r, int probes_per_piece,
                             const SupOptions& opts) {
  CollapseReport collapse = collapse_estimate(seq);
  if (collapse.kappa_hat > 0)
    throw Error("CollapseDetected",
                "the sequence collapses " + std::to_string(collapse.kappa_hat) +
                    " piece(s); no limit in the space");
  const int M = seq.size();
  const int T = std::min(collapse.window, M);
  const PCMap& first = seq.at(0);
  const PCMap& last = seq.at(M - 1);
  if (r > last.order()) throw Error("OrderTooHigh", "sequence order is below the requested r");

  LimitEstimate est{last};
  est.tail_window = T;
  for (int a = M - T; a < M; ++a)
    for (int b = a + 1; b < M; ++b)
      est.tail_bound = std::max(est.tail_bound, comp_metric(seq.at(a), seq.at(b), r, opts).upper);

  for (int i = 1; i <= first.piece_count(); ++i) {
    IntervalPair piece = first.piece_closure(i);
    for (int p = 0; p < probes_per_piece; ++p) {
      LimitEstimate::Probe probe;
      probe.piece = i;
      probe.x0 = piece.lo + piece.length() * (p + 0.5) / probes_per_piece;
      double s = probe.x0;
      probe.chain.push_back(s);
      probe.values.push_back(seq.at(0).branch_value(i, 0, s));
      for (int n = 1; n < M; ++n) {
        s = xi_deform_piece(seq.at(n - 1), seq.at(n), i, s);
        probe.chain.push_back(s);
        probe.values.push_back(seq.at(n).branch_value(i, 0, s));
      }
      double vmin = probe.values[static_cast<std::size_t>(M - T)], vmax = vmin;
      for (int n = M - T; n < M; ++n) {
        vmin = std::min(vmin, probe.values[static_cast<std::size_t>(n)]);
        vmax = std::max(vmax, probe.values[static_cast<std::size_t>(n)]);
      }
      probe.tail_oscillation = vmax - vmin;
      est.probes.push_back(std::move(probe));
    }
  }

  if (r >= 1) {
    // fundamental-theorem check at the representative: f(y) - f(a) must match
    // the integral of f' between probe points of the same piece
    double max_defect = 0.0;
    for (int i = 1; i <= last.piece_count(); ++i) {
      const BranchFn& br = last.branch(i);
      IntervalPair piece = last.piece_closure(i);
      double a = piece.lo + piece.length() * 0.5 / probes_per_piece;
      double fa = br.value(a);
      for (int p = 1; p < probes_per_piece; ++p) {
        double y = piece.lo + piece.length() * (p + 0.5) / probes_per_piece;
        double defect = std::abs(br.value(y) - fa - integrate_derivative(br, a, y, 1e-10));
        max_defect = std::max(max_defect, defect);
      }
    }
    est.max_ftc_defect = max_defect;
  }
  return est;
}

}  // namespace pcm
