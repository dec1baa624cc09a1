#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/compile.hpp"
#include "qpd/unital.hpp"

using namespace qpd;

namespace {

UnitalParams example() {
  return extract_params(make_process(fixtures::qubit_layout(), fixtures::unital_example_choi(), ChoiKind::comb),
                        3, fixtures::cyclic_unitary(3));
}

// Non-Pauli instance: s1, t1 ≠ 0.
UnitalParams skewed() {
  UnitalParams p;
  p.R = 3;
  p.s0 = 0.1;
  p.s2 = 1.0 / 3 - 0.1;
  p.t0 = 0.05;
  p.t2 = 0.03;
  p.s1 = 0.02;
  p.t1 = 0.01;
  p.U = fixtures::cyclic_unitary(3);
  return extract_params(make_process(fixtures::qubit_layout(), 3.0 * p.zeta0(), ChoiKind::comb), 3, p.U);
}

void check_apex(const ConeApex& a, double x, double y, double z, double tol = 1e-12) {
  CHECK(a.x == doctest::Approx(x).epsilon(tol));
  CHECK(std::abs(a.y - y) <= tol);
  CHECK(std::abs(a.z - z) <= tol);
}

double generic(const UnitalParams& p, double p_inc) {
  const auto r = solve_primal_dual(build_inconclusive(p.family(), PriorWeights::uniform(p.R), p_inc));
  CHECK(r.status == SolveStatus::optimal);
  return r.primal_value;
}

}  // namespace

TEST_CASE("parameter extraction") {
  const auto p = example();
  CHECK(p.s0 == doctest::Approx(0.1));
  CHECK(p.t0 == doctest::Approx(0.1));
  CHECK(p.s2 == doctest::Approx(0.7 / 3));
  CHECK(p.t2 == doctest::Approx(0.1 / 3));
  CHECK(std::abs(p.s1) < 1e-15);
  CHECK(std::abs(p.t1) < 1e-15);
  CHECK(p.pauli());
  CHECK(frobenius_norm(3.0 * p.zeta0() - fixtures::unital_example_choi()) < 1e-14);

  CHECK_NOTHROW(extract_params(fixtures::identity_channel(), 2, fixtures::cyclic_unitary(2)));
  HermitianMatrix cplx_s1 = fixtures::unital_example_choi();
  cplx_s1.set(0, 1, cplx(0, 0.05));
  cplx_s1.set(2, 3, cplx(0, 0.05));
  CHECK_THROWS_AS(extract_params(make_process(fixtures::qubit_layout(), cplx_s1, ChoiKind::hermitian), 3,
                                 fixtures::cyclic_unitary(3)),
                  InputError);
  CHECK_THROWS_AS(extract_params(fixtures::amplitude_damping(0.5), 2, fixtures::cyclic_unitary(2)), InputError);
}

TEST_CASE("cone apexes of the example") {
  const auto a = cone_apexes(example(), 0.4);
  check_apex(a.v00, 0.2, 0, 0);
  check_apex(a.v01, 2.0 / 15, 0, -2.0 / 15);
  check_apex(a.v11, 0.5 * 0.4, 0, -0.2 * 0.4);
  CHECK(in_cone({0.3, 0, 0}, a.v00));
  CHECK_FALSE(in_cone({0.3, 0, 0.2}, a.v00));
}

TEST_CASE("breakpoints of the example") {
  const auto bp = breakpoints(example());
  check_apex(bp.upsilon_prime, 7.0 / 30, 0, -1.0 / 30);
  CHECK(bp.q0 == doctest::Approx(8.0 / 21).epsilon(1e-12));
  CHECK(bp.q1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
  check_apex(bp.sigma1, 1.0 / 3, 0, -2.0 / 15);
  CHECK(bp.p0 == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(breakpoints(skewed()), InputError);
}

TEST_CASE("minimal cone point along q") {
  const auto p = example();
  const auto bp = breakpoints(p);
  check_apex(uopt(p, 0.0), 7.0 / 30, 0, -1.0 / 30);
  check_apex(uopt(p, 2.0 / 3), 1.0 / 3, 0, -2.0 / 15);
  const double f = (0.5 - 8.0 / 21) / (2.0 / 3 - 8.0 / 21);
  const auto& v = bp.upsilon_prime;
  const auto& s = bp.sigma1;
  check_apex(uopt(p, 0.5), v.x + f * (s.x - v.x), 0, v.z + f * (s.z - v.z));
  check_apex(uopt(p, 2.0), 1.0, 0, -0.4);
}

TEST_CASE("optimal success curve of the example") {
  const auto c = popt_curve(example());
  CHECK(c.evaluate(0.0) == doctest::Approx(7.0 / 15).epsilon(1e-12));
  CHECK(c.evaluate(0.5) == doctest::Approx(7.0 / 15 - 4.0 / 21).epsilon(1e-12));
  CHECK(c.evaluate(0.7) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c.evaluate(0.9) == doctest::Approx(2.0 / 30).epsilon(1e-12));
  CHECK(std::abs(c.evaluate(1.0)) < 1e-12);
  for (double pi : {0.0, 0.35, 0.7, 0.85})
    CHECK(std::abs(popt_legendre(example(), pi) - c.evaluate(pi)) < 1e-4);
  CHECK(popt_general(example(), 0.35) == doctest::Approx(c.evaluate(0.35)).epsilon(1e-6));
}

TEST_CASE("analytic curve against the generic solver") {
  const auto p = example();
  for (double pi : {0.0, 0.7}) CHECK(generic(p, pi) == doctest::Approx(popt(p, pi)).epsilon(1e-4));
  const auto s = skewed();
  CHECK_FALSE(s.pauli());
  for (double pi : {0.0, 0.3}) CHECK(generic(s, pi) == doctest::Approx(popt(s, pi)).epsilon(1e-4));
}

TEST_CASE("dual certificate from the cone point") {
  const auto p = example();
  const auto bp = breakpoints(p);
  const auto spec = build_inconclusive(p.family(), PriorWeights::uniform(3), 0.0);
  const auto cert = chi_reconstruct(bp.upsilon_prime, bp.q0, p);
  CHECK(cert.chi.trace() == doctest::Approx(4 * bp.upsilon_prime.x));
  CHECK(cert.lambda_value == doctest::Approx(7.0 / 15));
  CHECK(dual_objective(cert, spec) == doctest::Approx(7.0 / 15).epsilon(1e-12));
  const auto r = solve_primal_dual(spec);
  CHECK(r.dual_value == doctest::Approx(7.0 / 15).epsilon(1e-5));
  const auto k = kkt_residuals(r.tester, cert, spec);
  CHECK(k.r_feas_dual < 1e-9);
  CHECK(k.r_lambda < 1e-6);

  const auto big = chi_reconstruct({5, 0, 0}, 0.1, p);
  CHECK(min_eigenvalue(big.chi) > 0);
  CHECK_THROWS_AS(chi_reconstruct({0, 0, 0}, 0.0, p), InputError);
}
