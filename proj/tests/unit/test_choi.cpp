#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/choi.hpp"

using namespace qpd;

TEST_CASE("maximally entangled Choi matrix") {
  const auto m = max_entangled_choi(2);
  REQUIRE(m.dim() == 4u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const bool corner = (i == 0 || i == 3) && (j == 0 || j == 3);
      CHECK(std::abs(m(i, j) - cplx(corner ? 1.0 : 0.0)) < 1e-15);
    }
  CHECK(max_entangled_choi(1).dim() == 1u);
  CHECK(max_entangled_choi(1)(0, 0).real() == doctest::Approx(1.0));
  const auto m3 = max_entangled_choi(3);
  CHECK(m3.trace() == doctest::Approx(3.0));
  CHECK(max_eigenvalue(m3) == doctest::Approx(3.0));
}

TEST_CASE("Choi matrices from Kraus operators") {
  CHECK(frobenius_norm(fixtures::identity_channel().matrix - max_entangled_choi(2)) < 1e-14);

  CMatrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1;
  k1(0, 1) = 1;
  const auto ad = choi_from_kraus({k0, k1});
  const auto expected = kron(HermitianMatrix::diagonal({1, 0}), HermitianMatrix::identity(2));
  CHECK(frobenius_norm(ad.matrix - expected) < 1e-14);
  CHECK(ad.kind == ChoiKind::cp);

  const CMatrix x = CMatrix::from_rows({{0, 1}, {1, 0}});
  const auto cx = choi_from_kraus({x});
  const auto ref = conjugate_by(kron(x, CMatrix::identity(2)), max_entangled_choi(2));
  CHECK(frobenius_norm(cx.matrix - ref) < 1e-14);
}

TEST_CASE("comb validation") {
  CHECK(validate_comb(fixtures::identity_channel()).valid);
  CHECK(validate_comb(fixtures::identity_channel()).residuals[0] < 1e-14);
  CHECK(validate_comb(make_process(fixtures::qubit_layout(), fixtures::unital_example_choi(),
                                   ChoiKind::hermitian))
            .valid);
  const auto bad = make_process(fixtures::qubit_layout(),
                                HermitianMatrix::diagonal({1.5, 0.5, 0, 0}), ChoiKind::hermitian);
  const auto r = validate_comb(bad);
  CHECK_FALSE(r.valid);
  CHECK(r.residuals[0] > 0.1);
  CHECK_THROWS_AS(make_process(fixtures::qubit_layout(), HermitianMatrix::diagonal({1.5, 0.5, 0, 0}),
                               ChoiKind::comb),
                  InputError);
  CHECK_THROWS_AS(make_process(fixtures::qubit_layout(), HermitianMatrix::identity(2),
                               ChoiKind::hermitian),
                  InputError);
}

TEST_CASE("link_tensor builds valid combs") {
  const auto c = link_tensor({fixtures::identity_channel(), fixtures::identity_channel()});
  CHECK(c.layout.T() == 2u);
  CHECK(c.matrix.dim() == 16u);
  CHECK(validate_comb(c).valid);
  CHECK(frobenius_norm(c.matrix - kron(max_entangled_choi(2), max_entangled_choi(2))) < 1e-14);

  std::mt19937_64 rng(21);
  const auto a = fixtures::random_channel(rng, 2, 3, 2);
  const auto b = fixtures::random_channel(rng, 3, 2, 2);
  const auto ab = link_tensor({a, b});
  CHECK(validate_comb(ab).valid);
  const auto single = link_tensor({a});
  CHECK(frobenius_norm(single.matrix - a.matrix) < 1e-14);
}

TEST_CASE("tester validation") {
  const SystemLayout states({Step{1, 2}});
  Tester povm{states, {HermitianMatrix::diagonal({1, 0}), HermitianMatrix::diagonal({0, 1})}, {}};
  CHECK(validate_tester(povm).valid);

  const auto layout = fixtures::qubit_layout();
  Tester ent{layout,
             {HermitianMatrix::diagonal({0.5, 0.5, 0, 0}), HermitianMatrix::diagonal({0, 0, 0.5, 0.5})},
             {TesterSet::fixed_entangled}};
  CHECK(validate_tester(ent).valid);

  // Σ Φ = I/4 = I_W ⊗ τ forces τ = I/4, whose trace is ½.
  Tester half{layout, {0.25 * HermitianMatrix::identity(4)}, {}};
  CHECK_FALSE(validate_tester(half).valid);

  Tester negative{layout, {HermitianMatrix::diagonal({1, -0.5, 0, 0})}, {}};
  CHECK_FALSE(validate_tester(negative).valid);
}

TEST_CASE("outcome probabilities") {
  // Bell-basis measurement with a maximally entangled input separates identity and X.
  const auto layout = fixtures::qubit_layout();
  const double s = 1.0 / std::sqrt(2.0);
  const auto phi_plus = HermitianMatrix::outer({s, 0, 0, s});
  const auto psi_plus = HermitianMatrix::outer({0, s, s, 0});
  const auto rest = HermitianMatrix::identity(4) - phi_plus - psi_plus;
  Tester t{layout, {0.5 * phi_plus, 0.5 * (psi_plus + rest)}, {}};
  REQUIRE(validate_tester(t).valid);
  const auto p = outcome_probs(t, fixtures::identity_channel());
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-14));

  Tester uniform{layout, {uniform_set_element(layout) * (1.0 / 3), uniform_set_element(layout) * (1.0 / 3),
                          uniform_set_element(layout) * (1.0 / 3)},
                 {}};
  std::mt19937_64 rng(2);
  const auto q = outcome_probs(uniform, fixtures::random_channel(rng, 2, 2, 3));
  for (double v : q) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("probabilities sum to one for random combs and testers") {
  std::mt19937_64 rng(4);
  const auto c = link_tensor({fixtures::random_channel(rng, 2, 2, 2), fixtures::random_channel(rng, 2, 2, 3)});
  // Random general tester: τ_1 a state, τ_2 = ρ_{V2 W1 V1} with Tr_{V2} = I ⊗ τ_1.
  const auto layout = c.layout;
  const auto tau1 = HermitianMatrix::diagonal({0.3, 0.7});
  const auto tau2 = kron(HermitianMatrix::diagonal({0.6, 0.4}), kron(HermitianMatrix::identity(2), tau1));
  const auto sigma = kron(HermitianMatrix::identity(2), tau2);
  const auto half = HermitianMatrix::diagonal({1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0});
  // Split σ into two PSD parts: σ^{1/2} P σ^{1/2} and the complement.
  const auto root = spectral_map(sigma, [](double v) { return std::sqrt(std::max(v, 0.0)); });
  const HermitianMatrix p0 = HermitianMatrix::from_matrix(root.matrix() * half.matrix() * root.matrix());
  Tester t{layout, {p0, sigma - p0}, {}};
  REQUIRE(validate_tester(t).valid);
  const auto p = outcome_probs(t, c);
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] >= -1e-12);
  CHECK(p[1] >= -1e-12);
}

TEST_CASE("membership in the span of combs") {
  const auto layout = fixtures::qubit_layout();
  CHECK(lin_chn_membership(0.5 * HermitianMatrix::identity(4), layout).member);
  CHECK_FALSE(lin_chn_membership(HermitianMatrix::diagonal({1, 0, 0, 0}), layout).member);
}

TEST_CASE("link product of a state with a channel") {
  // ρ on A, channel A → B: ρ * C = Λ(ρ).
  const auto rho = HermitianMatrix::from_rows({{0.75, 0.25}, {0.25, 0.25}});
  const auto ad = fixtures::amplitude_damping(1.0);
  LabeledOperator a{rho, {"A"}, {2}};
  LabeledOperator c{ad.matrix, {"B", "A"}, {2, 2}};
  const auto out = link_product(a, c);
  REQUIRE(out.labels == std::vector<std::string>{"B"});
  CHECK(frobenius_norm(out.matrix - HermitianMatrix::diagonal({1, 0})) < 1e-14);
}
