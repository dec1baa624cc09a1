#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/compile.hpp"

using namespace qpd;

TEST_CASE("helstrom bound for |0> versus |+>") {
  const double s = 1.0 / std::sqrt(2.0);
  const auto spec = build_min_error({fixtures::state({1, 0}), fixtures::state({s, s})},
                                    PriorWeights::uniform(2));
  const auto r = solve_primal_dual(spec);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.primal_value == doctest::Approx(0.5 * (1 + std::sqrt(0.5))).epsilon(1e-6));
  CHECK(r.gap < 1e-6);
}

TEST_CASE("inconclusive discrimination of the cyclic unital family") {
  const auto combs = fixtures::cyclic_family(fixtures::unital_example_choi(), 3);
  const auto spec = build_inconclusive(combs, PriorWeights::uniform(3), 0.5);
  const auto r = solve_primal_dual(spec);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.primal_value == doctest::Approx(7.0 / 15 - 4.0 / 21).epsilon(1e-5));
  MESSAGE("iterations " << r.primal_report.iterations << " / " << r.dual_report.iterations);
}

TEST_CASE("two-step change point closes the duality gap") {
  const auto cp = build_change_point(fixtures::identity_channel(), fixtures::amplitude_damping(0.6), 2);
  const auto r = solve_primal_dual(cp.spec);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.gap < 1e-5);
  CHECK(r.cert.residuals.pass(1e-4));
  MESSAGE("value " << r.primal_value << " iterations " << r.primal_report.iterations << " / "
                   << r.dual_report.iterations);
}

TEST_CASE("support function of a two-step comb is one") {
  const auto c = link_tensor({fixtures::amplitude_damping(0.3), fixtures::identity_channel()});
  const auto l = lambda_S(c.matrix, {}, c.layout);
  CHECK(l.value == doctest::Approx(1.0).epsilon(1e-8));
}
