#pragma once

#include <vector>

#include "qpd/certify.hpp"
#include "qpd/conic.hpp"

namespace qpd {

// Inconclusive discrimination of R equiprobable unital qubit channels Λ_r = Ad_{U^r ⊗ I}(Λ₀),
// reduced to cones in R³. Parameters are entries of ζ₀ = Λ₀ / R:
//   ζ₀ = [[s0, s1, t1, t0], [s1, s2, t2, −t1], [t1, t2, s2, −s1], [t0, −t1, −s1, s0]].
struct UnitalParams {
  std::size_t R = 2;
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0, t2 = 0;
  CMatrix U;  // diagonal, U^R = I

  HermitianMatrix zeta0() const;
  HermitianMatrix zeta1(double q) const;  // q Σ_r Λ_r / R
  bool pauli() const;                     // s1 = t1 = 0
  std::vector<ProcessChoi> family() const;
};

// Throws InputError with the offending residual when Λ₀ is not a symmetric unital qubit channel
// of the required pattern, or when U is not diagonal with U^R = I.
UnitalParams extract_params(const ProcessChoi& lambda0, std::size_t R, const CMatrix& U);

struct ConeApex {
  double x = 0, y = 0, z = 0;
};

// The cone N_v = {u : u_x − v_x ≥ ‖(u_y − v_y, u_z − v_z)‖}.
bool in_cone(const ConeApex& u, const ConeApex& apex, double tol = 1e-12);

struct Apexes {
  ConeApex v00, v01, v11;  // υ^{0,0}, υ^{0,1}, υ^{1,1}(q)
};
Apexes cone_apexes(const UnitalParams& p, double q);

struct Breakpoints {
  ConeApex upsilon_prime;  // min-x point of N_{υ00} ∩ N_{υ01}
  double q0 = 0, q1 = 0;
  ConeApex sigma0, sigma1;  // υ^{1,1}(q0), υ^{1,1}(q1)
  double p0 = 1;
};
// Closed form; needs the Pauli case with s0, s2 > 0 (InputError otherwise).
Breakpoints breakpoints(const UnitalParams& p);

// Min-x point of N_{υ00} ∩ N_{υ01} ∩ N_{υ11(q)}: closed form in the Pauli case, a 2×2 conic
// solve otherwise.
ConeApex uopt(const UnitalParams& p, double q, const SolveOptions& opts = {});

struct PoptCurve {
  Breakpoints bp;
  // P(p) = 2υ′_x − q0·p below p0, 2ς1_x − q1·p from p0 on.
  double evaluate(double p_inc) const;
};
PoptCurve popt_curve(const UnitalParams& p);

// inf over a uniform q-grid on [0, max(2 q1, 2)] of 2 u^opt_x(q) − q p_inc.
double popt_legendre(const UnitalParams& p, double p_inc, std::size_t grid = 2001,
                     const SolveOptions& opts = {});
// min Tr X − p_inc q over X ⪰ ν00, ν01, ν11(q), q ≥ 0; valid for any parameters.
double popt_general(const UnitalParams& p, double p_inc, const SolveOptions& opts = {});
// Closed form in the Pauli case, popt_general otherwise.
double popt(const UnitalParams& p, double p_inc);

// χ = Θ(X ⊕ X)Θ† from u = (x, y, z), certificate (χ, q) with λ = 2x. Throws InputError when u
// violates the cone constraints by more than 1e-9.
DualCertificate chi_reconstruct(const ConeApex& u, double q, const UnitalParams& p);

}  // namespace qpd
