#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"

namespace pcm {

// Ordered finite prefix of a map sequence; all elements share X, N and order.
class MapSequence {
 public:
  explicit MapSequence(std::vector<PCMap> maps);
  static MapSequence from_directory(const std::filesystem::path& dir,
                                    const LoadOptions& opts = {});
  static MapSequence from_manifest(const std::filesystem::path& manifest,
                                   const LoadOptions& opts = {});

  const std::vector<PCMap>& maps() const { return maps_; }
  int size() const { return static_cast<int>(maps_.size()); }
  const PCMap& at(int n) const { return maps_[static_cast<std::size_t>(n)]; }

 private:
  std::vector<PCMap> maps_;
};

// Symmetric matrix of comp^r enclosures for all pairs.
std::vector<std::vector<Bounds>> pairwise_comp(const MapSequence& seq, int r,
                                               const SupOptions& opts = {});

enum class PieceTrend { Collapsing, Stable, Inconclusive };

// Finite-prefix estimate of the collapse index: piece i is flagged collapsing
// when its final length is below tol_c and non-increasing over the trailing
// window; stable when bounded below by 10 tol_c there. The limit index is
// undecidable from a prefix, so the report is declared a heuristic.
struct CollapseReport {
  int kappa_hat = 0;
  struct PerPiece {
    std::vector<double> lengths;  // per sequence element
    PieceTrend flag = PieceTrend::Inconclusive;
  };
  std::vector<PerPiece> per_piece;
  double tol_c = 1e-3;
  int window = 5;
  bool heuristic = true;
};

CollapseReport collapse_estimate(const MapSequence& seq, double tol_c = 1e-3, int window = 5);

// Representative-plus-tail-bound description of the limit of a kappa_hat = 0
// sequence, with the deformation chains s_n(x) and the values f_n(s_n(x))
// tracked at probe points. Refuses collapsing sequences
// (Error("CollapseDetected")).
struct LimitEstimate {
  PCMap representative;
  double tail_bound = 0.0;
  int tail_window = 0;
  struct Probe {
    int piece = 0;
    double x0 = 0.0;
    std::vector<double> chain;   // s_n(x0)
    std::vector<double> values;  // f_n(s_n(x0))
    double tail_oscillation = 0.0;
  };
  std::vector<Probe> probes;
  // max over probe pairs of |f(y) - f(a) - \int_a^y f'| (only when r >= 1)
  std::optional<double> max_ftc_defect;
};

LimitEstimate limit_estimate(const MapSequence& seq, int r, int probes_per_piece = 16,
                             const SupOptions& opts = {});

}  // namespace pcm
