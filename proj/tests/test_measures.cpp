#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pcm/connections.hpp"
#include "pcm/measures.hpp"
#include "pcm/perturb.hpp"

using namespace pcm;
using namespace fixtures;

TEST_CASE("doubling map rows are exactly half-half on dyadic cells") {
  UlamOperator op = ulam_operator(doubling(), 8);
  CHECK(op.exact);
  REQUIRE(op.cells() == 8);
  for (int a = 0; a < 8; ++a) {
    int nonzero = 0;
    double sum = 0.0;
    for (int b = 0; b < 8; ++b) {
      double v = op.entry(a, b);
      sum += v;
      if (v != 0.0) {
        CHECK(v == 0.5);
        ++nonzero;
      }
    }
    CHECK(nonzero == 2);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  // hand check of row 0: [0, 1/8) maps onto [0, 1/4)
  CHECK(op.entry(0, 0) == 0.5);
  CHECK(op.entry(0, 1) == 0.5);
}

TEST_CASE("identity branches give the identity matrix") {
  PCMap id = PCMap::from_exprs({0.0, 1.0}, 1, {0.5}, {"x", "x"});
  UlamOperator op = ulam_operator(id, 8);
  for (int a = 0; a < op.cells(); ++a)
    for (int b = 0; b < op.cells(); ++b)
      CHECK(op.entry(a, b) == (a == b ? 1.0 : 0.0));

  StationaryResult st = stationary_measure(op);
  CHECK(st.converged);
  for (double w : st.measure.weights)
    CHECK(w == doctest::Approx(1.0 / op.cells()).epsilon(1e-12));
  CHECK(invariance_residual(st.measure, op) == 0.0);
}

TEST_CASE("breakpoints refine the partition") {
  PCMap f = PCMap::from_exprs({0.0, 1.0}, 0, {0.3}, {"x/2 + 0.2", "x/2"});
  UlamOperator op = ulam_operator(f, 4);
  CHECK(op.cells() == 5);  // 0.3 inserted into the uniform 4-cell grid
  bool found = false;
  for (double e : op.edges) found |= (e == 0.3);
  CHECK(found);
}

TEST_CASE("Lebesgue measure is stationary for the doubling map") {
  double prev_residual = 1e308;
  for (int k = 2; k <= 256; k *= 2) {
    UlamOperator op = ulam_operator(doubling(), k);
    StationaryResult st = stationary_measure(op);
    CHECK(st.converged);
    for (double w : st.measure.weights) {
      CHECK(std::abs(w - 1.0 / k) <= 1e-6);
    }
    double res = invariance_residual(st.measure, op);
    CHECK(res <= 1e-10);
    CHECK(res <= prev_residual);
    prev_residual = res;
    CHECK(std::abs(st.residual - res) <= 1e-12);  // solver agrees with the recompute
  }
}

TEST_CASE("contracting fixture concentrates at the attracting fixed point") {
  PCMap f = contracting();
  // direct-iteration oracle: all mass ends near 0.15
  int hits = 0;
  const int starts = 10000;
  for (int s = 0; s <= starts; ++s) {
    double x = static_cast<double>(s) / starts;
    if (x == 0.5) continue;
    for (int k = 0; k < 60; ++k) x = x / 3 + (x < 0.5 ? 0.1 : 0.05);
    if (std::abs(x - 0.15) < 1e-6) ++hits;
  }
  CHECK(hits >= starts - 1);

  for (int k : {64, 128}) {
    UlamOperator op = ulam_operator(f, k);
    StationaryResult st = stationary_measure(op);
    double mass = 0.0;
    for (int a = 0; a < op.cells(); ++a) {
      if (op.edges[static_cast<std::size_t>(a)] <= 0.15 &&
          0.15 <= op.edges[static_cast<std::size_t>(a) + 1])
        mass += st.measure.weights[static_cast<std::size_t>(a)];
    }
    CAPTURE(k);
    CHECK(mass >= 0.99);
  }
}

TEST_CASE("stratified sampling mode is seeded and row-stochastic") {
  PCMap f = PCMap::from_exprs({0.0, 1.0}, 0, {0.5},
                              {"0.5 + 0.25*sin(4*pi*x)", "x/2"});
  UlamOperator a = ulam_operator(f, 16, 64, 7);
  UlamOperator b = ulam_operator(f, 16, 64, 7);
  CHECK_FALSE(a.exact);
  CHECK(a.matrix == b.matrix);
  for (int row = 0; row < a.cells(); ++row) {
    double sum = 0.0;
    for (int col = 0; col < a.cells(); ++col) sum += a.entry(row, col);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  UlamOperator c = ulam_operator(f, 16, 64, 8);
  CHECK(a.matrix != c.matrix);
}

TEST_CASE("random no-connections maps admit approximate invariant measures") {
  MapGenParams params;
  params.lipschitz_cap = 1.5;
  int tested = 0;
  for (int t = 0; tested < 20 && t < 200; ++t) {
    params.pieces = 2 + t % 3;
    PCMap f = random_map(params, 3000 + t);
    if (!check_connections(f, 30).ok) continue;
    ++tested;
    UlamOperator op = ulam_operator(f, 64, 64, 11);
    StationaryResult st = stationary_measure(op);
    CAPTURE(t);
    CHECK(st.residual <= 1e-8);
  }
  CHECK(tested == 20);
}

TEST_CASE("invariance residual validates shapes") {
  UlamOperator op = ulam_operator(doubling(), 8);
  MeasureVector bad{std::vector<double>(4, 0.25)};
  CHECK_THROWS_AS(invariance_residual(bad, op), Error);
}
