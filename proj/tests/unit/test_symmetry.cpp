#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/compile.hpp"
#include "qpd/symmetry.hpp"

using namespace qpd;

namespace {

const cplx I(0, 1);

CMatrix s_matrix() { return CMatrix::from_rows({{0, 1}, {-1, 0}}); }

ProblemSpec cyclic_inconclusive(double p_inc) {
  return build_inconclusive(fixtures::cyclic_family(fixtures::unital_example_choi(), 3),
                            PriorWeights::uniform(3), p_inc);
}

GroupAction cyclic_dihedral() { return dihedral_action(3, fixtures::cyclic_unitary(3), 2, 1, 1); }

// A random feasible tester for a single-step problem: τ a random state, Φ_m = σ^{1/2} E_m σ^{1/2}
// for a random POVM E on W⊗V.
Tester random_tester(std::mt19937_64& rng, const SystemLayout& layout, std::size_t M) {
  const std::size_t d = layout.total_dim();
  const std::size_t nv = layout.step(1).n_v;
  std::vector<HermitianMatrix> parts;
  HermitianMatrix total(d);
  for (std::size_t m = 0; m < M; ++m) {
    const auto h = fixtures::random_hermitian(rng, d);
    parts.push_back(HermitianMatrix::from_matrix(h.matrix() * h.matrix()));
    total += parts.back();
  }
  const auto inv_root = spectral_map(total, [](double v) { return 1.0 / std::sqrt(v); });
  const auto a = fixtures::random_hermitian(rng, nv);
  auto tau = HermitianMatrix::from_matrix(a.matrix() * a.matrix()) + 0.1 * HermitianMatrix::identity(nv);
  tau *= 1.0 / tau.trace();
  const auto sigma = kron(HermitianMatrix::identity(layout.step(1).n_w), tau);
  const auto root = spectral_map(sigma, [](double v) { return std::sqrt(std::max(v, 0.0)); });
  Tester t{layout, {}, {}};
  for (const auto& p : parts) {
    const CMatrix e = inv_root.matrix() * p.matrix() * inv_root.matrix();
    t.elements.push_back(HermitianMatrix::from_matrix(root.matrix() * e * root.matrix()));
  }
  return t;
}

}  // namespace

TEST_CASE("anti-unitary composition") {
  const HerAction a{s_matrix(), true};
  const HerAction id{CMatrix::identity(2), false};
  CHECK(same_action(compose(a, a), id));
  std::mt19937_64 rng(1);
  const auto x = fixtures::random_hermitian(rng, 2);
  const HerAction u{fixtures::random_unitary(rng, 2), false};
  const auto lhs = compose(a, u).apply(x);
  const auto rhs = a.apply(u.apply(x));
  CHECK(frobenius_norm(lhs - rhs) < 1e-12);
  CHECK(same_action(HerAction{I * CMatrix::identity(2), false}, id));
}

TEST_CASE("group construction") {
  const auto g = cyclic_dihedral();
  CHECK(g.order() == 6u);
  for (std::size_t a = 0; a < g.order(); ++a) {
    CHECK(g.compose(a, g.inverse(a)) == g.identity());
    for (std::size_t b = 0; b < g.order(); ++b)
      for (std::size_t m = 0; m < 4; ++m) CHECK(g.m(g.compose(a, b), m) == g.m(a, g.m(b, m)));
  }
  // Not closed: a single rotation by 2π/3 without its powers.
  const CMatrix r = kron(fixtures::cyclic_unitary(3), CMatrix::identity(2));
  CHECK_THROWS_AS(GroupAction::make({{0, 1}, {1, 0}}, {{}, {}}, {}, {{CMatrix::identity(4), false}, {r, false}}),
                  InputError);
  CHECK_THROWS_AS(GroupAction::make({{0}}, {{}}, {}, {{2.0 * CMatrix::identity(2), false}}), InputError);
}

TEST_CASE("symmetry of problems") {
  CHECK(check_symmetric(cyclic_inconclusive(0.3), cyclic_dihedral()).symmetric);
  const auto skewed = build_inconclusive(fixtures::cyclic_family(fixtures::unital_example_choi(), 3),
                                         PriorWeights::make({0.4, 0.3, 0.3}), 0.3);
  const auto rep = check_symmetric(skewed, cyclic_dihedral());
  CHECK_FALSE(rep.symmetric);
  CHECK_FALSE(rep.violations.empty());
  std::mt19937_64 rng(3);
  const auto any = build_min_error({fixtures::random_channel(rng, 2, 2, 2), fixtures::random_channel(rng, 2, 2, 2)},
                                   PriorWeights::make({0.3, 0.7}));
  CHECK(check_symmetric(any, GroupAction::trivial(2, 0, 0, 4)).symmetric);
  CHECK_THROWS_AS(check_symmetric(any, cyclic_dihedral()), InputError);
}

TEST_CASE("twirling a tester preserves the objective and feasibility") {
  const auto spec = cyclic_inconclusive(0.3);
  const auto g = cyclic_dihedral();
  std::mt19937_64 rng(5);
  const auto t = random_tester(rng, spec.layout, 4);
  REQUIRE(validate_tester(t, 1e-9).valid);
  const auto tw = twirl_tester(t, g);
  CHECK(validate_tester(tw, 1e-9).valid);
  CHECK(spec.objective(tw) == doctest::Approx(spec.objective(t)).epsilon(1e-12));
  CHECK(eta(tw, spec)[0] == doctest::Approx(eta(t, spec)[0]).epsilon(1e-12));
  // Covariance and idempotence.
  for (std::size_t h = 0; h < g.order(); ++h)
    for (std::size_t m = 0; m < 4; ++m)
      CHECK(frobenius_norm(g.act(h, tw.elements[m]) - tw.elements[g.m(h, m)]) < 1e-12);
  const auto tw2 = twirl_tester(tw, g);
  for (std::size_t m = 0; m < 4; ++m) CHECK(frobenius_norm(tw2.elements[m] - tw.elements[m]) < 1e-12);
  const auto same = twirl_tester(t, GroupAction::trivial(4, 1, 0, 4));
  for (std::size_t m = 0; m < 4; ++m) CHECK(frobenius_norm(same.elements[m] - t.elements[m]) < 1e-15);
}

TEST_CASE("twirling a dual point") {
  const auto spec = cyclic_inconclusive(0.3);
  const auto g = cyclic_dihedral();
  const auto r = solve_primal_dual(spec);
  auto cert = r.cert;
  // Break the symmetry while staying dual feasible: add a PSD bump.
  cert.chi += 0.05 * HermitianMatrix::diagonal({1, 0, 0, 0});
  cert.lambda_value = lambda_S(cert.chi, spec.descriptor, spec.layout).value;
  const auto tw = twirl_dual(cert, g, spec);
  CHECK(dual_objective(tw, spec) <= dual_objective(cert, spec) + 1e-9);
  for (std::size_t h = 0; h < g.order(); ++h) CHECK(frobenius_norm(g.act(h, tw.chi) - tw.chi) < 1e-12);
  // Rotations kill every entry coupling different W indices; the reflection makes χ real.
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 2; j < 4; ++j) CHECK(std::abs(tw.chi(i, j)) < 1e-12);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(tw.chi(i, j).imag()) < 1e-12);

  // q on a single orbit becomes its mean.
  const std::vector<std::vector<std::size_t>> pj = {{0, 1}, {1, 0}};
  const auto swap = GroupAction::make({{0}, {0}}, pj, {}, {{CMatrix::identity(1), false}, {CMatrix::identity(1), false}});
  ProblemSpec two;
  two.layout = SystemLayout({Step{1, 1}});
  two.M = 1;
  two.J = 2;
  two.c = {HermitianMatrix::scalar(1)};
  two.a = {{HermitianMatrix::scalar(0)}, {HermitianMatrix::scalar(0)}};
  two.b = {1, 1};
  DualCertificate qc;
  qc.chi = HermitianMatrix::scalar(1);
  qc.q = {0.2, 0.6};
  const auto tq = twirl_dual(qc, swap, two);
  CHECK(tq.q[0] == doctest::Approx(0.4));
  CHECK(tq.q[1] == doctest::Approx(0.4));
}

TEST_CASE("irreducibility") {
  const std::vector<HerAction> paulis = {{CMatrix::identity(2), false},
                                         {CMatrix::from_rows({{0, 1}, {1, 0}}), false},
                                         {CMatrix::from_rows({{0, -I}, {I, 0}}), false},
                                         {CMatrix::from_rows({{1, 0}, {0, -1}}), false}};
  const auto p = irreducible(paulis);
  CHECK(p.irreducible);
  CHECK(p.commutant_dim == 1u);
  const auto triv = irreducible({{CMatrix::identity(2), false}});
  CHECK_FALSE(triv.irreducible);
  CHECK(triv.commutant_dim == 4u);
  const auto s = irreducible({{CMatrix::identity(2), false}, {s_matrix(), true}});
  CHECK(s.irreducible);
  CHECK(s.commutant_dim == 1u);
  CHECK_FALSE(irreducible({{CMatrix::identity(2), false}, {CMatrix::from_rows({{1, 0}, {0, -1}}), false}})
                  .irreducible);
}

TEST_CASE("entangled-input sufficiency from symmetry") {
  std::mt19937_64 rng(9);
  const auto spec = build_min_error({fixtures::random_unital(rng), fixtures::random_unital(rng)},
                                    PriorWeights::uniform(2));
  const auto action = GroupAction::make({{0, 1}, {0, 1}}, {{}, {}}, {},
                                        {{CMatrix::identity(4), false}, {kron(s_matrix(), s_matrix()), true}});
  const auto rep = entangled_sufficiency(spec, action, {{{0, 1}, {{CMatrix::identity(2), false}, {s_matrix(), true}}}});
  CHECK(rep.symmetric);
  CHECK(rep.sufficient);
  CHECK(rep.factorization_residual < 1e-10);

  const auto trivial = entangled_sufficiency(spec, GroupAction::trivial(2, 0, 0, 4),
                                             {{{0}, {{CMatrix::identity(2), false}}}});
  CHECK_FALSE(trivial.sufficient);

  // Generalized Paulis X^a Z^b on a qutrit input act as (X^a Z^b)^* ⊗ X^a Z^b on W ⊗ V for the
  // modulo-sum family; the input representation is irreducible.
  const double w = 2.0 * std::numbers::pi / 3;
  CMatrix X(3, 3), Z(3, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    X((k + 1) % 3, k) = 1;
    Z(k, k) = std::polar(1.0, w * static_cast<double>(k));
  }
  std::vector<HerAction> input;
  CMatrix xa = CMatrix::identity(3);
  for (int a = 0; a < 3; ++a) {
    CMatrix zb = CMatrix::identity(3);
    for (int b = 0; b < 3; ++b) {
      input.push_back({xa * zb, false});
      zb = Z * zb;
    }
    xa = X * xa;
  }
  CHECK(irreducible(input).irreducible);
}
