#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pcm/experiment.hpp"
#include "pcm/perturb.hpp"

using namespace pcm;
using namespace fixtures;

TEST_CASE("no-op targets return the same map") {
  PCMap f = fig1_f();
  PCMap g = perturb_breakpoint(f, 1, 0.5, 0.75, 0.2);
  CHECK(comp_metric(f, g, 0).upper <= 1e-12);
  CHECK(g.to_document() == f.to_document());
}

TEST_CASE("breakpoint and limit targets are hit exactly") {
  PCMap f = fig1_f();
  PCMap g = perturb_breakpoint(f, 1, 0.48, 0.76, 0.2);
  CHECK(g.cut(1) == 0.48);
  CHECK(g.branch_value(1, 0, 0.48) == 0.76);
  Bounds c = comp_metric(f, g, 0);
  CHECK(c.upper < 0.2);
  // constructions round-trip through the file format
  PCMap re = PCMap::load(g.to_document());
  CHECK(re.cut(1) == 0.48);
  CHECK(re.branch_value(1, 0, 0.48) == 0.76);
}

TEST_CASE("right-limit variant pins the other side") {
  PCMap f = fig1_f();
  double right = f.branch_value(2, 0, 0.5);
  CHECK(right == 0.0);
  PCMap g = perturb_breakpoint(f, 1, 0.52, 0.03, 0.2, /*right_limit=*/true);
  CHECK(g.cut(1) == 0.52);
  CHECK(g.branch_value(2, 0, 0.52) == 0.03);
  CHECK(comp_metric(f, g, 0).upper < 0.2);
}

TEST_CASE("precondition gates") {
  PCMap f = fig1_f();
  try {
    perturb_breakpoint(f, 1, 0.9, 0.75, 0.2);
    FAIL("expected TargetTooFar");
  } catch (const Error& e) {
    CHECK(e.code() == "TargetTooFar");
  }
  // collision with a neighbouring breakpoint even inside the eps/N window
  PCMap three = PCMap::from_exprs({0.0, 1.0}, 0, {0.4, 0.45},
                                  {"x/2", "x/2 + 0.1", "x/2 - 0.2"});
  try {
    perturb_breakpoint(three, 1, 0.46, three.branch_value(1, 0, 0.4), 0.9);
    FAIL("expected OrderCollision");
  } catch (const Error& e) {
    CHECK(e.code() == "OrderCollision");
  }
}

TEST_CASE("perturbing there and back is metrically invisible") {
  PCMap f = fig1_f();
  PCMap g = perturb_breakpoint(f, 1, 0.48, 0.76, 0.2);
  PCMap back = perturb_breakpoint(g, 1, 0.5, 0.75, 0.2);
  CHECK(comp_metric(f, back, 0).upper <= 1e-10);
  CHECK(comp_metric(f, back, 1).upper <= 1e-10);
}

TEST_CASE("random neighbors are deterministic, valid and inside the ball") {
  PCMap f = fig1_f();
  PCMap a = random_neighbor(f, 0.01, 42);
  PCMap b = random_neighbor(f, 0.01, 42);
  CHECK(a.to_document() == b.to_document());

  for (int t = 0; t < 100; ++t) {
    PCMap g = random_neighbor(f, 0.01, 1000 + t);  // construction validates
    CHECK(g.cut(1) != 0.5);
    CHECK(comp_metric(f, g, 1).upper < 0.01);
  }
  CHECK(comp_metric(f, random_neighbor(f, 1e-6, 5), 0).upper < 1e-6);
  CHECK_THROWS_AS(random_neighbor(f, 0.4, 1), Error);  // above half min piece length
}

TEST_CASE("repair leaves connection-free maps untouched") {
  PCMap f = doubling();
  RepairResult r = repair_connections(f, 10, 0.01, 0);
  CHECK_FALSE(r.changed);
  CHECK(r.h.is_identity());
  CHECK(r.post.ok);
  CHECK(r.map.to_document() == f.to_document());
}

TEST_CASE("repair removes the figure-1 connection") {
  PCMap f = fig1_f();
  const int n = 10;
  const double eps = 0.05;
  RepairResult r = repair_connections(f, n, eps, 0);
  CHECK(r.changed);
  CHECK(r.post.ok);
  CHECK(r.comp0.upper < eps);

  const int N = f.piece_count();
  double lambda = lipschitz_estimate(f).value;
  // 1x: h stays within the lemma budget
  CHECK(r.max_deviation < eps / (4.0 * N * (1.0 + lambda)));
  // 2x: h fixes the kept orbit segments exactly (they are knots of h)
  for (std::size_t k = 0; k < r.h.xs().size(); ++k) {
    double x = r.h.xs()[k];
    if (x == r.map.cut(1)) continue;  // the moved preimage
    CHECK(r.h(x) == r.h.ys()[k]);
  }
  // 3x: the preimage of the old breakpoint avoids Delta_f and the kept orbits
  double pre = r.map.cut(1);
  CHECK(pre != 0.5);
  ConnectionReport before = check_connections(f, n);
  for (const auto& orbit : before.orbits)
    for (double p : orbit) CHECK(std::abs(pre - p) > 1e-12);

  // the repaired map still loads from its own document
  PCMap re = PCMap::load(r.map.to_document());
  CHECK(check_connections(re, n).ok);
}

TEST_CASE("repair reports no room at degenerate budgets") {
  try {
    repair_connections(fig1_f(), 5, 1e-300, 0);
    FAIL("expected NoRoomToMove");
  } catch (const Error& e) {
    CHECK(e.code() == "NoRoomToMove");
  }
}

TEST_CASE("generators produce valid seeded maps") {
  MapGenParams p;
  p.pieces = 3;
  PCMap a = random_map(p, 9);
  PCMap b = random_map(p, 9);
  CHECK(a.to_document() == b.to_document());
  CHECK(a.piece_count() == 3);

  MapGenParams pc = p;
  pc.cubic = true;
  pc.order = 2;
  PCMap c = random_map(pc, 11);
  CHECK(c.order() == 2);

  for (int t = 0; t < 20; ++t) {
    PCMap f = random_connected_map(p, 10, 50 + t);
    CAPTURE(t);
    CHECK_FALSE(check_connections(f, 10).ok);
  }
}

TEST_CASE("genericity experiment aggregates repair outcomes") {
  GenericityParams gp;
  gp.samples = 30;
  gp.horizon = 8;
  gp.seed = 4;
  GenericityReport rep = genericity_experiment(gp);
  CHECK(rep.pass_count + rep.fail_count == 30);
  CHECK(rep.pass_fraction >= 0.0);
  CHECK(rep.pass_fraction <= 1.0);
  GenericityReport rep2 = genericity_experiment(gp);
  CHECK(rep2.pass_count == rep.pass_count);
  CHECK(rep2.repaired_ok == rep.repaired_ok);
}
