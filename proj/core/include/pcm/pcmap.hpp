#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcm/expr.hpp"

namespace pcm {

struct IntervalPair {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// max(|I.lo - J.lo|, |I.hi - J.hi|); equals the Hausdorff distance between
// compact intervals on the line.
double hausdorff_interval(const IntervalPair& I, const IntervalPair& J);

// Increasing piecewise-linear bijection given by knots (xs[k] -> ys[k]).
// Evaluation is exact at knots; between knots it interpolates affinely.
class PiecewiseAffine {
 public:
  PiecewiseAffine(std::vector<double> xs, std::vector<double> ys);

  static PiecewiseAffine identity(const IntervalPair& I);

  double operator()(double x) const;
  double inverse(double y) const;
  // slope of the cell containing x (right-side cell at interior knots)
  double slope_at(double x) const;
  Jet jet_at(double x, int order) const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  IntervalPair domain() const { return {xs_.front(), xs_.back()}; }
  IntervalPair range() const { return {ys_.front(), ys_.back()}; }
  bool is_identity() const;
  // PL ⇒ attained at a knot
  double max_deviation_from_identity() const;

  std::string serialize() const;
  static PiecewiseAffine parse(std::string_view text);
  // outer(inner(.)), with knots at inner's knots and at the inner-preimages
  // of outer's knots; inner's range must lie within outer's domain
  static PiecewiseAffine compose(const PiecewiseAffine& outer, const PiecewiseAffine& inner);
  // restriction to [lo, hi]; lo and hi must be existing knots or interior
  PiecewiseAffine restrict(double lo, double hi) const;

 private:
  std::vector<double> xs_, ys_;
};

// One branch map: an expression, optionally precomposed with an increasing
// piecewise-affine reparametrization (x -> ast(warp(x))).
struct BranchFn {
  ExprPtr ast;
  std::optional<PiecewiseAffine> warp;

  Jet jet(double x, int order) const;
  double value(double x) const { return jet(x, 0).value(); }
};

struct LoadOptions {
  bool clamp = false;       // project eval() output onto X instead of rejecting
  int grid_per_piece = 1024;  // validation density (intervals per piece)
};

// Validated piecewise map on a compact interval: N >= 2 closed pieces cut by
// strictly increasing interior breakpoints, one branch per piece, declared
// smoothness order r. Immutable after construction.
class PCMap {
 public:
  static PCMap load(std::string_view document, const LoadOptions& opts = {});
  static PCMap create(IntervalPair domain, int order, std::vector<double> breakpoints,
                      std::vector<BranchFn> branches, const LoadOptions& opts = {});
  static PCMap from_exprs(IntervalPair domain, int order, std::vector<double> breakpoints,
                          const std::vector<std::string>& branch_exprs,
                          const LoadOptions& opts = {});

  const IntervalPair& domain() const { return domain_; }
  int order() const { return order_; }
  int piece_count() const { return static_cast<int>(branches_.size()); }
  std::vector<double> breakpoints() const;
  // c_0, c_1, ..., c_N with i in [0, N]
  double cut(int i) const { return cuts_[static_cast<std::size_t>(i)]; }
  IntervalPair piece_closure(int piece) const;  // piece in [1, N]
  const BranchFn& branch(int piece) const;      // piece in [1, N]

  // Half-open piece convention [c0,c1), (c_i,c_{i+1}), (c_{N-1},cN]; throws
  // Error("ValueAtBreakpoint") at interior breakpoints and
  // Error("OutsideDomain") off X.
  double eval(double x) const;
  int piece_of(double x) const;  // same conventions as eval
  bool is_breakpoint(double x) const;

  // One-sided (closed piece) data: jet coefficient `deriv` of the branch at x.
  double branch_value(int piece, int deriv, double x) const;
  Jet branch_jet(int piece, int order, double x) const;

  double min_piece_length() const;
  bool same_shape(const PCMap& other) const;
  std::string to_document() const;

 private:
  PCMap() = default;
  void validate(const LoadOptions& opts) const;

  IntervalPair domain_;
  int order_ = 0;
  std::vector<double> cuts_;  // size N+1
  std::vector<BranchFn> branches_;
  bool clamp_ = false;
};

// The deformation homeomorphism of the piecewise-comparison metric: maps
// closed piece i of f affinely onto closed piece i of g. Piece endpoints map
// to endpoints exactly; equal pieces map identically. Throws
// Error("ShapeMismatch") when f and g differ in X or N.
double xi_deform(const PCMap& f, const PCMap& g, double x);
// Same, pinned to a piece (1-based); x must lie in the closed piece i of f.
double xi_deform_piece(const PCMap& f, const PCMap& g, int piece, double x);
// The affine deformation [from] -> [to] with exact endpoints.
double xi_affine(const IntervalPair& from, const IntervalPair& to, double x);

}  // namespace pcm
