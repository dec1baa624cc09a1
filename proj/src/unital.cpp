#include "qpd/unital.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qpd {

namespace {

HermitianMatrix real_symmetric(const std::vector<std::vector<double>>& rows) {
  HermitianMatrix h(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i; j < rows.size(); ++j) h.set(i, j, rows[i][j]);
  return h;
}

// ν = [[x + z, y], [y, x − z]]
HermitianMatrix nu(const ConeApex& v) { return real_symmetric({{v.x + v.z, v.y}, {v.y, v.x - v.z}}); }

ConeApex apex_of(const HermitianMatrix& x) {
  return {0.5 * (x(0, 0).real() + x(1, 1).real()), x(0, 1).real(),
          0.5 * (x(0, 0).real() - x(1, 1).real())};
}

SolveOptions tight(SolveOptions opts) {
  opts.eps_abs = std::min(opts.eps_abs, 1e-11);
  opts.eps_rel = std::min(opts.eps_rel, 1e-10);
  return opts;
}

bool closed_form_applies(const UnitalParams& p) { return p.pauli() && p.s0 > 1e-12 && p.s2 > 1e-12; }

// An upper bound on q1: past it υ11(q) lies in the cone of υ′.
double q1_bound(const UnitalParams& p) {
  if (closed_form_applies(p)) return breakpoints(p).q1;
  const double lo = min_eigenvalue(nu(cone_apexes(p, 1.0).v11));
  if (!(lo > 1e-12)) throw InputError("ζ₀ diagonal block is singular; no finite q range");
  return std::max(0.0, max_eigenvalue(nu(uopt(p, 0.0))) / lo);
}

}  // namespace

HermitianMatrix UnitalParams::zeta0() const {
  return real_symmetric(
      {{s0, s1, t1, t0}, {s1, s2, t2, -t1}, {t1, t2, s2, -s1}, {t0, -t1, -s1, s0}});
}

HermitianMatrix UnitalParams::zeta1(double q) const {
  const double f = q * static_cast<double>(R);
  return real_symmetric({{f * s0, f * s1, 0, 0},
                         {f * s1, f * s2, 0, 0},
                         {0, 0, f * s2, -f * s1},
                         {0, 0, -f * s1, f * s0}});
}

bool UnitalParams::pauli() const { return std::abs(s1) <= 1e-12 && std::abs(t1) <= 1e-12; }

std::vector<ProcessChoi> UnitalParams::family() const {
  const CMatrix u = kron(U, CMatrix::identity(2));
  std::vector<ProcessChoi> out;
  HermitianMatrix cur = zeta0() * static_cast<double>(R);
  const SystemLayout layout({Step{2, 2}});
  for (std::size_t r = 0; r < R; ++r) {
    out.push_back(make_process(layout, cur, ChoiKind::comb));
    cur = conjugate_by(u, cur);
  }
  return out;
}

UnitalParams extract_params(const ProcessChoi& lambda0, std::size_t R, const CMatrix& U) {
  if (!(lambda0.layout == SystemLayout({Step{2, 2}})))
    throw InputError("unital analysis needs a single qubit-to-qubit channel");
  if (R < 2) throw InputError("unital analysis needs R ≥ 2");
  if (U.rows() != 2 || U.cols() != 2 || std::abs(U(0, 1)) > 1e-12 || std::abs(U(1, 0)) > 1e-12)
    throw InputError("U must be a diagonal 2×2 unitary");
  CMatrix power = CMatrix::identity(2);
  for (std::size_t r = 0; r < R; ++r) power = U * power;
  if (frobenius_norm(U.adjoint() * U - CMatrix::identity(2)) > 1e-9 ||
      frobenius_norm(power - CMatrix::identity(2)) > 1e-9)
    throw InputError("U must be unitary with U^R = I");

  const HermitianMatrix& l = lambda0.matrix;
  double imag = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) imag = std::max(imag, std::abs(l(i, j).imag()));
  if (imag > 1e-9) {
    std::ostringstream os;
    os << "Λ₀ is not transpose symmetric (largest imaginary entry " << imag << ")";
    throw InputError(os.str());
  }
  UnitalParams p;
  p.R = R;
  p.U = U;
  const double inv = 1.0 / static_cast<double>(R);
  p.s0 = l(0, 0).real() * inv;
  p.s1 = l(0, 1).real() * inv;
  p.t1 = l(0, 2).real() * inv;
  p.t0 = l(0, 3).real() * inv;
  p.s2 = l(1, 1).real() * inv;
  p.t2 = l(1, 2).real() * inv;
  const double pattern = frobenius_norm(p.zeta0() - l * inv);
  const double trace = std::abs(p.s0 + p.s2 - inv);
  if (pattern > 1e-9 || trace > 1e-9) {
    std::ostringstream os;
    os << "Λ₀ does not have the unital qubit pattern (pattern residual " << pattern
       << ", trace residual " << trace << ")";
    throw InputError(os.str());
  }
  if (min_eigenvalue(l) < -1e-9) throw InputError("Λ₀ is not completely positive");
  return p;
}

bool in_cone(const ConeApex& u, const ConeApex& apex, double tol) {
  return u.x - apex.x + tol >= std::hypot(u.y - apex.y, u.z - apex.z);
}

Apexes cone_apexes(const UnitalParams& p, double q) {
  Apexes a;
  for (int k = 0; k < 2; ++k) {
    const double sg = k == 0 ? 1.0 : -1.0;
    ConeApex v{0.5 * (p.s0 + p.s2 + sg * (p.t0 - p.t2)), p.s1 - sg * p.t1,
               0.5 * (p.s0 - p.s2 + sg * (p.t0 + p.t2))};
    (k == 0 ? a.v00 : a.v01) = v;
  }
  const double f = q * static_cast<double>(p.R);
  a.v11 = {0.5 * f * (p.s0 + p.s2), f * p.s1, 0.5 * f * (p.s0 - p.s2)};
  return a;
}

Breakpoints breakpoints(const UnitalParams& p) {
  if (!closed_form_applies(p))
    throw InputError("closed-form breakpoints need s1 = t1 = 0 and s0, s2 > 0");
  const Apexes a = cone_apexes(p, 0.0);
  // In the plane y = 0, N_v = {x + z ≥ v_x + v_z, x − z ≥ v_x − v_z}.
  const double A = std::max(a.v00.x + a.v00.z, a.v01.x + a.v01.z);
  const double B = std::max(a.v00.x - a.v00.z, a.v01.x - a.v01.z);
  Breakpoints bp;
  bp.upsilon_prime = {0.5 * (A + B), 0.0, 0.5 * (A - B)};
  const double R = static_cast<double>(p.R);
  const double qa = std::max(0.0, A / (R * p.s0));
  const double qb = std::max(0.0, B / (R * p.s2));
  bp.q0 = std::min(qa, qb);
  bp.q1 = std::max(qa, qb);
  bp.sigma0 = cone_apexes(p, bp.q0).v11;
  bp.sigma1 = cone_apexes(p, bp.q1).v11;
  bp.p0 = bp.q1 != bp.q0 ? (2.0 * bp.sigma1.x - 2.0 * bp.upsilon_prime.x) / (bp.q1 - bp.q0) : 1.0;
  return bp;
}

ConeApex uopt(const UnitalParams& p, double q, const SolveOptions& opts) {
  if (!(q >= 0.0)) throw InputError("q must be nonnegative");
  if (closed_form_applies(p)) {
    const Breakpoints bp = breakpoints(p);
    if (q <= bp.q0) return bp.upsilon_prime;
    if (q >= bp.q1) return cone_apexes(p, q).v11;
    const double f = (q - bp.q0) / (bp.q1 - bp.q0);
    const ConeApex& a = bp.upsilon_prime;
    const ConeApex& b = bp.sigma1;
    return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)};
  }
  const Apexes a = cone_apexes(p, q);
  ProgramBuilder b;
  const std::size_t x = b.add_free_hermitian("X", 2);
  int index = 0;
  for (const ConeApex* v : {&a.v00, &a.v01, &a.v11}) {
    const std::size_t s = b.add_psd("slack" + std::to_string(index++), 2);
    b.add_matrix_equality(2,
                          {{s, [](const HermitianMatrix& m) { return m; }},
                           {x, [](const HermitianMatrix& m) { return -m; }}},
                          {}, -nu(*v));
  }
  b.add_objective(ProgramBuilder::InnerTerm{x, HermitianMatrix::identity(2)});
  const ConicProgram prog = b.build(Sense::minimize);
  const SolveReport r = solve(prog, tight(opts));
  return apex_of(prog.matrix(r.x, "X"));
}

double PoptCurve::evaluate(double p_inc) const {
  if (!(p_inc >= 0.0 && p_inc <= 1.0)) throw InputError("p_inc must lie in [0, 1]");
  if (p_inc < bp.p0) return 2.0 * bp.upsilon_prime.x - bp.q0 * p_inc;
  return 2.0 * bp.sigma1.x - bp.q1 * p_inc;
}

PoptCurve popt_curve(const UnitalParams& p) { return PoptCurve{breakpoints(p)}; }

double popt_legendre(const UnitalParams& p, double p_inc, std::size_t grid,
                     const SolveOptions& opts) {
  if (!(p_inc >= 0.0 && p_inc <= 1.0)) throw InputError("p_inc must lie in [0, 1]");
  if (grid < 2) throw InputError("grid needs at least two points");
  const double qmax = std::max(2.0 * q1_bound(p), 2.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid; ++i) {
    const double q = qmax * static_cast<double>(i) / static_cast<double>(grid - 1);
    best = std::min(best, 2.0 * uopt(p, q, opts).x - q * p_inc);
  }
  return best;
}

double popt_general(const UnitalParams& p, double p_inc, const SolveOptions& opts) {
  if (!(p_inc >= 0.0 && p_inc <= 1.0)) throw InputError("p_inc must lie in [0, 1]");
  const Apexes a = cone_apexes(p, 1.0);
  ProgramBuilder b;
  const std::size_t x = b.add_free_hermitian("X", 2);
  const std::size_t q = b.add_nonneg("q", 1);
  const auto ident = [](const HermitianMatrix& m) { return m; };
  const auto neg = [](const HermitianMatrix& m) { return -m; };
  const std::size_t s0 = b.add_psd("slack00", 2);
  const std::size_t s1 = b.add_psd("slack01", 2);
  const std::size_t s2 = b.add_psd("slack11", 2);
  b.add_matrix_equality(2, {{s0, ident}, {x, neg}}, {}, -nu(a.v00));
  b.add_matrix_equality(2, {{s1, ident}, {x, neg}}, {}, -nu(a.v01));
  b.add_matrix_equality(2, {{s2, ident}, {x, neg}}, {{q, 0, nu(a.v11)}}, HermitianMatrix(2));
  b.add_objective(ProgramBuilder::InnerTerm{x, HermitianMatrix::identity(2)});
  b.add_objective(ProgramBuilder::EntryTerm{q, 0, -p_inc});
  const ConicProgram prog = b.build(Sense::minimize);
  const SolveReport r = solve(prog, tight(opts));
  return prog.evaluate(r.x);
}

double popt(const UnitalParams& p, double p_inc) {
  if (closed_form_applies(p)) return popt_curve(p).evaluate(p_inc);
  return popt_general(p, p_inc);
}

DualCertificate chi_reconstruct(const ConeApex& u, double q, const UnitalParams& p) {
  if (!(q >= 0.0)) throw InputError("q must be nonnegative");
  DualCertificate c;
  c.chi = real_symmetric({{u.x + u.z, u.y, 0, 0},
                          {u.y, u.x - u.z, 0, 0},
                          {0, 0, u.x - u.z, -u.y},
                          {0, 0, -u.y, u.x + u.z}});
  const double v = std::min(min_eigenvalue(c.chi - p.zeta0()), min_eigenvalue(c.chi - p.zeta1(q)));
  if (v < -1e-9) {
    std::ostringstream os;
    os << "u is outside the feasible cones (eigenvalue " << v << ")";
    throw InputError(os.str());
  }
  c.q = {q};
  c.lambda_value = 2.0 * u.x;
  c.chain = MarginalChain{{HermitianMatrix::scalar(c.lambda_value)}};
  return c;
}

}  // namespace qpd
