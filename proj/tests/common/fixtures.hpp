#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qpd/choi.hpp"

namespace fixtures {

using qpd::cplx;

inline qpd::SystemLayout qubit_layout(std::size_t T = 1) {
  return qpd::SystemLayout(std::vector<qpd::Step>(T, qpd::Step{2, 2}));
}

// Pure state |v⟩ as a process with a trivial input.
inline qpd::ProcessChoi state(const std::vector<cplx>& v) {
  return qpd::make_process(qpd::SystemLayout({qpd::Step{1, v.size()}}),
                           qpd::HermitianMatrix::outer(v), qpd::ChoiKind::comb);
}

// Λ₀ of the three-channel cyclic unital example (s0 = t0 = 0.3, s2 = 0.7, t2 = 0.1 at R = 3).
inline qpd::HermitianMatrix unital_example_choi() {
  return qpd::HermitianMatrix::from_rows({{0.3, 0, 0, 0.3},
                                          {0, 0.7, 0.1, 0},
                                          {0, 0.1, 0.7, 0},
                                          {0.3, 0, 0, 0.3}});
}

inline qpd::CMatrix cyclic_unitary(std::size_t R) {
  qpd::CMatrix u = qpd::CMatrix::identity(2);
  u(1, 1) = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(R));
  return u;
}

// Λ_r = Ad_{U^r ⊗ I}(Λ₀), r = 0..R−1.
inline std::vector<qpd::ProcessChoi> cyclic_family(const qpd::HermitianMatrix& l0, std::size_t R) {
  const qpd::CMatrix u = qpd::kron(cyclic_unitary(R), qpd::CMatrix::identity(2));
  std::vector<qpd::ProcessChoi> out;
  qpd::HermitianMatrix cur = l0;
  for (std::size_t r = 0; r < R; ++r) {
    out.push_back(qpd::make_process(qubit_layout(), cur, qpd::ChoiKind::comb));
    cur = qpd::conjugate_by(u, cur);
  }
  return out;
}

inline qpd::ProcessChoi identity_channel() {
  return qpd::choi_from_kraus({qpd::CMatrix::identity(2)});
}

inline qpd::ProcessChoi amplitude_damping(double g) {
  qpd::CMatrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - g);
  k1(0, 1) = std::sqrt(g);
  return qpd::choi_from_kraus({k0, k1});
}

// Σ_i p_i σ_i ρ σ_i with p = (p_I, p_X, p_Y, p_Z).
inline qpd::ProcessChoi pauli_channel(const std::vector<double>& p) {
  const cplx i(0, 1);
  const std::vector<qpd::CMatrix> paulis = {
      qpd::CMatrix::identity(2), qpd::CMatrix::from_rows({{0, 1}, {1, 0}}),
      qpd::CMatrix::from_rows({{0, -i}, {i, 0}}), qpd::CMatrix::from_rows({{1, 0}, {0, -1}})};
  std::vector<qpd::CMatrix> kraus;
  for (std::size_t k = 0; k < 4; ++k) kraus.push_back(std::sqrt(p[k]) * paulis[k]);
  return qpd::choi_from_kraus(kraus);
}

inline qpd::CMatrix random_unitary(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<std::vector<cplx>> cols(n, std::vector<cplx>(n));
  for (auto& c : cols)
    for (auto& v : c) v = cplx(g(rng), g(rng));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      cplx d = 0;
      for (std::size_t i = 0; i < n; ++i) d += std::conj(cols[j][i]) * cols[k][i];
      for (std::size_t i = 0; i < n; ++i) cols[k][i] -= d * cols[j][i];
    }
    double nrm = 0;
    for (auto& v : cols[k]) nrm += std::norm(v);
    for (auto& v : cols[k]) v /= std::sqrt(nrm);
  }
  qpd::CMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = cols[j][i];
  return u;
}

// Random unital qubit channel: a random mixture of unitaries.
inline qpd::ProcessChoi random_unital(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<double> p = {w(rng), w(rng), w(rng)};
  const double s = p[0] + p[1] + p[2];
  std::vector<qpd::CMatrix> kraus;
  for (double v : p) kraus.push_back(std::sqrt(v / s) * random_unitary(rng, 2));
  return qpd::choi_from_kraus(kraus);
}

// Random CPTP map via a Stinespring isometry with `rank` Kraus operators.
inline qpd::ProcessChoi random_channel(std::mt19937_64& rng, std::size_t n_v, std::size_t n_w,
                                       std::size_t rank) {
  const qpd::CMatrix u = random_unitary(rng, n_w * rank);
  std::vector<qpd::CMatrix> kraus;
  for (std::size_t k = 0; k < rank; ++k) {
    qpd::CMatrix kk(n_w, n_v);
    for (std::size_t i = 0; i < n_w; ++i)
      for (std::size_t j = 0; j < n_v; ++j) kk(i, j) = u(k * n_w + i, j);
    kraus.push_back(kk);
  }
  return qpd::choi_from_kraus(kraus);
}

inline qpd::HermitianMatrix random_hermitian(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  qpd::HermitianMatrix h(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) h.set(i, j, i == j ? cplx(g(rng)) : cplx(g(rng), g(rng)));
  return h;
}

}  // namespace fixtures
