#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pcm/metrics.hpp"
#include "pcm/perturb.hpp"

using namespace pcm;
using namespace fixtures;

TEST_CASE("comp reproduces the collapsing-family values") {
  // hand evaluation: |1/2 - 1/4| + max|x/2 - xi_1(x)/2| + max|x/2 - xi_2(x)/2|
  //                = 1/4 + 1/8 + 1/8 = 1/2, attained at the breakpoint
  PCMap f2 = ex34_fn(2), f4 = ex34_fn(4);
  Bounds b = comp_metric(f2, f4, 0);
  CHECK(b.contains(0.5));
  CHECK(b.width() <= 1e-9);

  // the displayed Cauchy bound dominates every pair
  for (int n = 3; n <= 12; ++n) {
    for (int m = 2; m < n; m += 3) {
      Bounds v = comp_metric(ex34_fn(n), ex34_fn(m), 0);
      double paper = 5.0 / (2.0 * (n - 1)) + 5.0 / (2.0 * m) + 1.0 / ((n - 1.0) * m);
      CAPTURE(n);
      CAPTURE(m);
      CHECK(v.upper <= paper + 1e-9);
      // grid oracle sees the same value
      double oracle = comp_grid_oracle(ex34_fn(n), ex34_fn(m), 0, 20000);
      CHECK(v.lower <= oracle + 1e-9);
      CHECK(v.upper >= oracle - 1e-9);
    }
  }
}

TEST_CASE("comp identity is numerically zero") {
  CHECK(comp_metric(fig1_f(), fig1_f(), 0).upper <= 1e-12);
  CHECK(comp_metric(fig1_f(), fig1_f(), 1).upper <= 1e-12);
  CHECK(comp_metric(quadratic_map(), quadratic_map(), 2).upper <= 1e-12);
  CHECK(dist_inf_metric(fig1_f(), fig1_f(), 1).upper <= 1e-12);
}

TEST_CASE("figure-1 family: comp shrinks while dist stays above 1/2") {
  PCMap f = fig1_f();
  double prev = 1e308;
  for (int n : {1, 2, 5, 10, 20}) {
    PCMap fn = fig1_fn(n);
    Bounds c = comp_metric(fn, f, 0);
    Bounds d = dist_inf_metric(fn, f, 0);
    CAPTURE(n);
    // exact piecewise-affine value 5/(2(n+2))
    CHECK(contains_tol(c, 5.0 / (2.0 * (n + 2))));
    CHECK(c.upper < prev);
    prev = c.upper;
    CHECK(d.lower >= 0.5 - 1e-9);
  }
  Bounds c100 = comp_metric(fig1_fn(100), f, 0);
  CHECK(c100.upper < 0.05);
  double oracle = comp_grid_oracle(fig1_fn(100), f, 0, 500000);
  CHECK(c100.lower <= oracle + 1e-9);
  CHECK(c100.upper >= oracle - 1e-9);
}

TEST_CASE("uniform metric reproduces the first Cauchy example") {
  for (int n = 1; n <= 12; ++n) {
    for (int m = 0; m < n; m += 2) {
      Bounds d = dist_inf_metric(ex21_fn(n), ex21_fn(m), 0);
      double paper = std::ldexp(1.0, -(n + 1)) + std::ldexp(1.0, -(m + 1)) +
                     std::ldexp(1.0, -(2 * m + 1));
      CAPTURE(n);
      CAPTURE(m);
      CHECK(d.upper <= paper + 1e-9);
      double oracle = dist_grid_oracle(ex21_fn(n), ex21_fn(m), 0, 20000);
      CHECK(d.upper >= oracle - 1e-9);
    }
  }
}

TEST_CASE("metric axioms on random affine maps") {
  MapGenParams params;
  params.lipschitz_cap = 3.0;
  for (int t = 0; t < 25; ++t) {
    params.pieces = 2 + t % 4;
    PCMap f = random_map(params, 100 + t);
    PCMap g = random_map(params, 200 + t);
    PCMap h = random_map(params, 300 + t);
    Bounds fg = comp_metric(f, g, 0);
    Bounds gf = comp_metric(g, f, 0);
    Bounds fh = comp_metric(f, h, 0);
    Bounds hg = comp_metric(h, g, 0);
    CAPTURE(t);
    CHECK(Bounds::intersect(fg, gf));
    CHECK(fg.lower <= fh.upper + hg.upper + 1e-9);
    CHECK(comp_metric(f, f, 0).upper <= 1e-12);
  }
}

TEST_CASE("equal-breakpoint sandwich between the two metrics") {
  MapGenParams params;
  for (int t = 0; t < 10; ++t) {
    params.pieces = 2 + t % 3;
    PCMap f = random_map(params, 400 + t);
    // same breakpoints, branch constants nudged
    std::vector<BranchFn> branches;
    for (int i = 1; i <= f.piece_count(); ++i) {
      BranchFn br = f.branch(i);
      br.ast = ast::add_const(br.ast, (i % 2 ? 1.0 : -1.0) * 0.003 * i);
      branches.push_back(std::move(br));
    }
    PCMap g_same = PCMap::create(f.domain(), f.order(), f.breakpoints(), std::move(branches));
    Bounds comp = comp_metric(f, g_same, 0);
    Bounds dist = dist_inf_metric(f, g_same, 0);
    CAPTURE(t);
    CHECK(dist.lower <= comp.upper + 1e-9);
    CHECK(comp.lower <= f.piece_count() * dist.upper + 1e-9);
  }
}

TEST_CASE("chi metric on functions with variable domains") {
  FunctionOnInterval F{{0.0, 1.0}, [](double x) { return x; }};
  CHECK(chi_metric(F, F).upper <= 1e-12);

  FunctionOnInterval G{{0.0, 0.5}, [](double x) { return x; }};
  Bounds b = chi_metric(F, G);
  // brute force: dH = 0.5 and sup |x - x/2| over [0,1] = 0.5
  double sup = 0.0;
  for (int k = 0; k <= 200000; ++k) {
    double x = k / 200000.0;
    sup = std::max(sup, std::abs(x - 0.5 * x));
  }
  double oracle = 0.5 + sup;
  CHECK(oracle == 1.0);
  CHECK(b.contains(oracle));
  CHECK(b.width() <= 1e-9);

  // deformation-compatible pair: the sup term vanishes, chi = dH = 0.3
  auto base = [](double x) { return x * x; };
  FunctionOnInterval F2{{0.0, 1.0}, base};
  FunctionOnInterval G2{{0.2, 0.7}, [base](double y) {
                          return base(xi_affine({0.2, 0.7}, {0.0, 1.0}, y));
                        }};
  Bounds b2 = chi_metric(F2, G2);
  CHECK(contains_tol(b2, 0.3));
  CHECK(b2.width() <= 1e-9);

  FunctionOnInterval bad{{0.5, 0.5}, [](double) { return 0.0; }};
  CHECK_THROWS_AS(chi_metric(F, bad), Error);
}

TEST_CASE("branch extensions live in the function space") {
  PCMap f = fig1_f();
  FunctionOnInterval b1 = branch_function(f, 1, 0);
  CHECK(b1.domain.lo == 0.0);
  CHECK(b1.domain.hi == 0.5);
  CHECK(b1.fn(0.5) == 0.75);
  FunctionOnInterval d1 = branch_function(f, 1, 1);
  CHECK(d1.fn(0.3) == 0.5);
  CHECK(chi_metric(b1, b1).upper <= 1e-12);
}

TEST_CASE("metric preconditions") {
  PCMap f = fig1_f();
  PCMap other = PCMap::from_exprs({0.0, 1.0}, 0, {0.3, 0.6}, {"x/2", "x/2", "x/2"});
  CHECK_THROWS_AS(comp_metric(f, other, 0), Error);
  CHECK_THROWS_AS(comp_metric(f, fig1_fn(3), 2), Error);  // above declared order
  CHECK_THROWS_AS(dist_inf_metric(f, other, 0), Error);
}

TEST_CASE("threaded evaluation is deterministic") {
  PCMap f = ex34_fn(2), g = ex34_fn(4);
  SupOptions seq_opts;
  SupOptions par_opts;
  par_opts.threads = 4;
  Bounds a = comp_metric(f, g, 0, seq_opts);
  Bounds b = comp_metric(f, g, 0, par_opts);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
}
