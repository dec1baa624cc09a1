#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/compile.hpp"

using namespace qpd;

namespace {

ProcessChoi x_channel() { return choi_from_kraus({CMatrix::from_rows({{0, 1}, {1, 0}})}); }

double solve_value(const ProblemSpec& spec) {
  const auto r = solve_primal_dual(spec);
  CHECK(r.status == SolveStatus::optimal);
  return r.primal_value;
}

}  // namespace

TEST_CASE("prior weights") {
  CHECK_THROWS_AS(PriorWeights::make({0.6, 0.6}), InputError);
  CHECK_THROWS_AS(PriorWeights::make({1.2, -0.2}), InputError);
  CHECK(PriorWeights::uniform(4).p[2] == doctest::Approx(0.25));
}

TEST_CASE("min-error discrimination") {
  const auto id = fixtures::identity_channel();
  CHECK(solve_value(build_min_error({id, x_channel()}, PriorWeights::uniform(2))) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(solve_value(build_min_error({id, id}, PriorWeights::uniform(2))) ==
        doctest::Approx(0.5).epsilon(1e-6));
  CHECK(solve_value(build_min_error({id, id}, PriorWeights::make({0.7, 0.3}))) ==
        doctest::Approx(0.7).epsilon(1e-6));
  const auto fam = fixtures::cyclic_family(fixtures::unital_example_choi(), 3);
  CHECK(solve_value(build_min_error(fam, PriorWeights::uniform(3))) ==
        doctest::Approx(7.0 / 15).epsilon(1e-5));
}

TEST_CASE("inconclusive discrimination") {
  const auto fam = fixtures::cyclic_family(fixtures::unital_example_choi(), 3);
  const auto spec = build_inconclusive(fam, PriorWeights::uniform(3), 0.7);
  CHECK(spec.M == 4u);
  CHECK(spec.J == 1u);
  CHECK(solve_value(spec) == doctest::Approx(0.2).epsilon(1e-5));
  CHECK(std::abs(solve_value(build_inconclusive(fam, PriorWeights::uniform(3), 1.0))) < 1e-5);
  CHECK_THROWS_AS(build_inconclusive(fam, PriorWeights::uniform(3), 1.5), InputError);
}

TEST_CASE("unambiguous discrimination") {
  const double s = 1.0 / std::sqrt(2.0);
  const auto zero = fixtures::state({1, 0});
  // Zero error leaves no strictly feasible point and the multiplier is unattained, so the
  // splitting iteration only creeps toward the optimum.
  const auto r = solve_primal_dual(build_unambiguous({zero, fixtures::state({s, s})}, PriorWeights::uniform(2)));
  CHECK(std::abs(r.primal_value - (1.0 - s)) < 5e-3);
  CHECK(std::abs(r.dual_value - (1.0 - s)) < 1e-2);
  CHECK(solve_value(build_unambiguous({zero, fixtures::state({0, 1})}, PriorWeights::uniform(2))) ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::abs(solve_value(build_unambiguous({zero, zero}, PriorWeights::uniform(2)))) < 1e-5);
}

TEST_CASE("Neyman-Pearson") {
  const auto id = fixtures::identity_channel();
  CHECK(solve_value(build_neyman_pearson(id, x_channel(), 0.0)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(solve_value(build_neyman_pearson(id, x_channel(), 1.0)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(solve_value(build_neyman_pearson(id, id, 0.3)) == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("constraint functions") {
  const auto fam = fixtures::cyclic_family(fixtures::unital_example_choi(), 3);
  const auto spec = build_inconclusive(fam, PriorWeights::uniform(3), 0.4);
  const auto u = uniform_set_element(spec.layout);
  // All-inconclusive tester: P_I = 1, so η = p_inc − 1.
  Tester t{spec.layout, {0.0 * u, 0.0 * u, 0.0 * u, u}, {}};
  const auto e = eta(t, spec);
  REQUIRE(e.size() == 1u);
  CHECK(e[0] == doctest::Approx(0.4 - 1.0));

  const auto me = build_min_error(fam, PriorWeights::uniform(3));
  CHECK(eta(Tester{me.layout, {u, 0.0 * u, 0.0 * u}, {}}, me).empty());

  const auto np = build_neyman_pearson(fam[0], fam[1], 0.25);
  const auto e_np = eta(Tester{np.layout, {u, 0.0 * u}, {}}, np);
  REQUIRE(e_np.size() == 1u);
  CHECK(e_np[0] == doctest::Approx(-0.25));
}

TEST_CASE("change point combs") {
  const auto id = fixtures::identity_channel();
  const auto one = build_change_point(id, x_channel(), 1);
  CHECK(one.combs.size() == 2u);
  const auto two = build_change_point(id, x_channel(), 2);
  CHECK(two.combs.size() == 3u);
  for (const auto& c : two.combs) CHECK(validate_comb(c).valid);
  const auto same = build_change_point(id, id, 2);
  CHECK(solve_value(same.spec) == doctest::Approx(1.0 / 3).epsilon(1e-5));
}

TEST_CASE("channel comparison") {
  const auto id = fixtures::identity_channel();
  const auto single = build_comparison({id}, {1.0}, 2);
  CHECK(single.trivial);
  CHECK(single.p_same == doctest::Approx(1.0));

  const auto two = build_comparison({id, x_channel()}, {0.5, 0.5}, 2);
  CHECK_FALSE(two.trivial);
  CHECK(two.p_same == doctest::Approx(0.5));
  CHECK(two.p_different == doctest::Approx(0.5));
  CHECK(validate_comb(two.same).valid);
  CHECK(validate_comb(two.different).valid);
}

TEST_CASE("permutation of channel order") {
  const auto p = build_permutation_order({fixtures::identity_channel(), x_channel()});
  CHECK(p.orders.size() == 2u);
  CHECK(p.combs.size() == 2u);
  for (const auto& c : p.combs) CHECK(validate_comb(c).valid);
}

TEST_CASE("spec checks") {
  auto spec = build_min_error({fixtures::identity_channel(), x_channel()}, PriorWeights::uniform(2));
  CHECK_NOTHROW(spec.check());
  spec.c.pop_back();
  CHECK_THROWS_AS(spec.check(), InputError);
}
