#include "qpd/certify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpd/compile.hpp"

namespace qpd {

double KktResiduals::max() const {
  return std::max({r_slack, r_comp, r_lambda, r_feas_primal, r_feas_dual, r_comp_elementwise});
}

bool KktResiduals::pass(double tol) const {
  return r_slack <= tol && r_comp <= tol && r_lambda <= tol && r_feas_primal <= tol &&
         r_feas_dual <= tol;
}

double dual_objective(const DualCertificate& cert, const ProblemSpec& spec) {
  if (cert.q.size() != spec.J) throw InputError("q length differs from J");
  double v = cert.lambda_value;
  for (std::size_t j = 0; j < spec.J; ++j) v += cert.q[j] * spec.b[j];
  return v;
}

std::vector<HermitianMatrix> z_vec(const std::vector<double>& q, const ProblemSpec& spec) {
  if (q.size() != spec.J) throw InputError("q length differs from J");
  std::vector<HermitianMatrix> z = spec.c;
  for (std::size_t j = 0; j < spec.J; ++j)
    for (std::size_t m = 0; m < spec.M; ++m) z[m] -= q[j] * spec.a[j][m];
  return z;
}

namespace {

// Tr_{W_t} ω_t − I_{V_t} ⊗ ω_{t−1}, with ω_T := χ.
HermitianMatrix chain_gap(const HermitianMatrix& upper, const HermitianMatrix& lower,
                          const SystemLayout& layout, std::size_t t) {
  const std::vector<std::size_t> ld = level_dims(layout, t);
  const std::vector<std::size_t> td = tau_dims(layout, t);
  return partial_trace(upper, ld, drop_first(ld.size())) -
         embed_identity(lower, td, drop_first(td.size()));
}

void check_chain_shape(const HermitianMatrix& chi, const SystemLayout& layout,
                       const MarginalChain& chain) {
  if (chi.dim() != layout.total_dim()) throw InputError("χ does not match layout");
  if (chain.levels.size() != layout.T()) throw InputError("chain has the wrong number of levels");
  for (std::size_t t = 0; t < layout.T(); ++t)
    if (chain.levels[t].dim() != product(level_dims(layout, t)))
      throw InputError("chain level has the wrong dimension");
}

double nonadaptive_lambda(const HermitianMatrix& chi, const SystemLayout& layout) {
  if (layout.T() != 2) throw InputError("nonadaptive tester set requires T = 2");
  return max_eigenvalue(partial_trace(chi, layout.factor_dims(), {false, true, false, true}));
}

}  // namespace

double restore_support_chain(const HermitianMatrix& chi, const SystemLayout& layout,
                             MarginalChain& chain) {
  check_chain_shape(chi, layout, chain);
  for (std::size_t t = layout.T(); t >= 1; --t) {
    const HermitianMatrix& upper = t == layout.T() ? chi : chain.levels[t];
    const double s = max_eigenvalue(chain_gap(upper, chain.levels[t - 1], layout, t));
    if (s > 0.0) chain.levels[t - 1] += HermitianMatrix::identity(chain.levels[t - 1].dim()) * s;
  }
  return chain.levels[0](0, 0).real();
}

double support_chain_violation(const HermitianMatrix& chi, const SystemLayout& layout,
                               const MarginalChain& chain) {
  check_chain_shape(chi, layout, chain);
  double v = 0.0;
  for (std::size_t t = layout.T(); t >= 1; --t) {
    const HermitianMatrix& upper = t == layout.T() ? chi : chain.levels[t];
    v = std::max(v, max_eigenvalue(chain_gap(upper, chain.levels[t - 1], layout, t)));
  }
  return v;
}

LambdaResult lambda_SG_nested(const HermitianMatrix& chi, const SystemLayout& layout) {
  const ConicProgram p = compile_support_program(chi, layout);
  SolveOptions opts;
  opts.eps_abs = 1e-12;
  opts.eps_rel = 1e-10;
  const SolveReport r = solve(p, opts);
  MarginalChain chain;
  chain.levels.push_back(HermitianMatrix::scalar(p.values(r.x, "omega0")[0]));
  for (std::size_t t = 1; t < layout.T(); ++t)
    chain.levels.push_back(p.matrix(r.x, "omega" + std::to_string(t)));
  LambdaResult out;
  out.value = restore_support_chain(chi, layout, chain);
  out.chain = chain;
  return out;
}

LambdaResult lambda_S(const HermitianMatrix& chi, const TesterSetDescriptor& descriptor,
                      const SystemLayout& layout) {
  if (chi.dim() != layout.total_dim()) throw InputError("χ does not match layout");
  LambdaResult out;
  switch (descriptor.variant) {
    case TesterSet::fixed_entangled:
      out.value = chi.trace() / static_cast<double>(layout.input_dim());
      return out;
    case TesterSet::nonadaptive:
      out.value = nonadaptive_lambda(chi, layout);
      return out;
    case TesterSet::general:
      break;
  }
  if (layout.T() >= 2) return lambda_SG_nested(chi, layout);
  out.value = max_eigenvalue(partial_trace(chi, layout.factor_dims(), {false, true}));
  out.chain = MarginalChain{{HermitianMatrix::scalar(out.value)}};
  return out;
}

KktResiduals kkt_residuals(const Tester& t, const DualCertificate& cert, const ProblemSpec& spec) {
  if (!(t.layout == spec.layout)) throw InputError("tester layout differs from the problem");
  if (t.elements.size() != spec.M) throw InputError("tester has the wrong number of outcomes");
  KktResiduals r;
  const std::vector<double> e = eta(t, spec);
  const std::vector<HermitianMatrix> z = z_vec(cert.q, spec);

  double feas_p = 0.0;
  for (std::size_t j = 0; j < spec.J; ++j) {
    r.r_slack = std::max(r.r_slack, std::abs(cert.q[j] * e[j]));
    feas_p = std::max(feas_p, e[j]);
  }

  double comp = 0.0;
  double phi_chi = 0.0;
  double feas_d = 0.0;
  for (std::size_t m = 0; m < spec.M; ++m) {
    const HermitianMatrix gap = cert.chi - z[m];
    comp += inner(t.elements[m], gap);
    phi_chi += inner(t.elements[m], cert.chi);
    r.r_comp_elementwise =
        std::max(r.r_comp_elementwise, frobenius_norm(gap.matrix() * t.elements[m].matrix()));
    feas_d = std::max(feas_d, -min_eigenvalue(gap));
    feas_p = std::max(feas_p, -min_eigenvalue(t.elements[m]));
  }
  r.r_comp = std::abs(comp);

  double lambda = cert.lambda_value;
  if (cert.chain) {
    feas_d = std::max(feas_d, support_chain_violation(cert.chi, spec.layout, *cert.chain));
    feas_d = std::max(feas_d, std::abs(cert.chain->levels[0](0, 0).real() - cert.lambda_value));
  } else {
    lambda = lambda_S(cert.chi, spec.descriptor, spec.layout).value;
    feas_d = std::max(feas_d, lambda - cert.lambda_value);
  }
  r.r_lambda = std::abs(phi_chi - lambda);

  for (double qj : cert.q) feas_d = std::max(feas_d, -qj);
  for (double v : tester_set_residuals(t.sum(), spec.layout, spec.descriptor))
    feas_p = std::max(feas_p, v);
  r.r_feas_primal = feas_p;
  r.r_feas_dual = feas_d;
  return r;
}

HermitianMatrix chi_from_tester(const Tester& t, const std::vector<double>& q,
                                const ProblemSpec& spec, double* rcond) {
  if (t.elements.size() != spec.M) throw InputError("tester has the wrong number of outcomes");
  const EigenDecomposition e = eig_herm(t.sum());
  const double hi = e.values.back();
  const double rc = hi > 0.0 ? std::max(0.0, e.values.front()) / hi : 0.0;
  if (rcond != nullptr) *rcond = rc;
  if (rc < 1e-10) {
    std::ostringstream os;
    os << "sum of tester elements is rank deficient (reciprocal condition number " << rc << ")";
    throw Error(os.str());
  }
  const HermitianMatrix inv = spectral_map(t.sum(), [](double x) { return 1.0 / x; });
  const std::vector<HermitianMatrix> z = z_vec(q, spec);
  const std::size_t d = spec.layout.total_dim();
  CMatrix num(d, d);
  for (std::size_t m = 0; m < spec.M; ++m) num += z[m].matrix() * t.elements[m].matrix();
  const CMatrix chi = num * inv.matrix();
  HermitianMatrix out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) out.set(i, j, 0.5 * (chi(i, j) + std::conj(chi(j, i))));
  return out;
}

TesterVerdict verify_tester(const Tester& t, const std::vector<double>& q, const ProblemSpec& spec,
                            double tol) {
  TesterVerdict v;
  v.cert.chi = chi_from_tester(t, q, spec, &v.rcond);
  v.cert.q = q;
  const LambdaResult l = lambda_S(v.cert.chi, spec.descriptor, spec.layout);
  v.cert.lambda_value = l.value;
  v.cert.chain = l.chain;
  v.cert.residuals = kkt_residuals(t, v.cert, spec);
  v.optimal = v.cert.residuals.pass(tol);
  return v;
}

DualCertificate lift_to_comb_span(const DualCertificate& cert, const SystemLayout& layout) {
  DualCertificate out = cert;
  if (!out.chain) {
    const LambdaResult l = lambda_S(cert.chi, TesterSetDescriptor{TesterSet::general}, layout);
    out.chain = l.chain;
    out.lambda_value = l.value;
  }
  MarginalChain& chain = *out.chain;
  check_chain_shape(cert.chi, layout, chain);
  // Bottom-up: ω_t += I_{W_t}/N_{W_t} ⊗ (I_{V_t} ⊗ ω_{t−1} − Tr_{W_t} ω_t), each correction PSD.
  const std::size_t T = layout.T();
  for (std::size_t t = 1; t <= T; ++t) {
    HermitianMatrix& upper = t == T ? out.chi : chain.levels[t];
    const HermitianMatrix gap = -chain_gap(upper, chain.levels[t - 1], layout, t);
    const std::vector<std::size_t> ld = level_dims(layout, t);
    upper += embed_identity(gap, ld, drop_first(ld.size())) *
             (1.0 / static_cast<double>(layout.step(t).n_w));
  }
  out.lambda_value = chain.levels[0](0, 0).real();
  return out;
}

EntangledVerdict entangled_optimality_binary(const ProcessChoi& c0, const ProcessChoi& c1,
                                             double p0, double p1) {
  if (!(c0.layout == c1.layout)) throw InputError("combs have different layouts");
  const HermitianMatrix delta = p0 * c0.matrix - p1 * c1.matrix;
  EntangledVerdict v;
  v.abs_delta = abs(delta);
  v.entangled_optimal = lin_chn_membership(v.abs_delta, c0.layout).member;
  v.chi = 0.5 * (p0 * c0.matrix + p1 * c1.matrix + v.abs_delta);
  v.value = v.chi.trace() / static_cast<double>(c0.layout.input_dim());
  return v;
}

NestedSetReport nested_set_predicates(const ProblemSpec& small, const ProblemSpec& large,
                                    const PrimalDualResult& small_result,
                                    const PrimalDualResult& large_result, double tol) {
  if (small.descriptor.variant != TesterSet::fixed_entangled ||
      large.descriptor.variant != TesterSet::general)
    throw InputError("nested sets must be the fixed entangled set inside the general set");
  if (!(small.layout == large.layout) || small.M != large.M || small.J != large.J)
    throw InputError("the two problems differ beyond the normalization set");

  NestedSetReport r;
  r.value_small = small_result.primal_value;
  r.value_large = large_result.primal_value;
  r.equal_values = std::abs(r.value_large - r.value_small) <= tol;

  const auto small_value = [&](const DualCertificate& c) {
    DualCertificate s = c;
    s.lambda_value = lambda_S(c.chi, small.descriptor, small.layout).value;
    return dual_objective(s, small);
  };
  const auto small_optimal = [&](const DualCertificate& c) {
    return small_value(c) <= r.value_small + tol;
  };
  const auto lambdas_equal = [&](const DualCertificate& c) {
    const double l1 = lambda_S(c.chi, small.descriptor, small.layout).value;
    const double l2 = lambda_S(c.chi, large.descriptor, large.layout).value;
    return std::abs(l1 - l2) <= tol;
  };

  const DualCertificate lifted = lift_to_comb_span(large_result.cert, large.layout);
  for (const DualCertificate* c : {&small_result.cert, &large_result.cert, &lifted}) {
    if (small_optimal(*c) && lambdas_equal(*c)) {
      r.lambda_equal_witness = true;
      break;
    }
  }
  r.large_optimum_is_small_optimal = small_optimal(large_result.cert);
  r.comb_span_witness =
      small_optimal(lifted) && lin_chn_membership(lifted.chi, large.layout, 1e-6).member;
  return r;
}

}  // namespace qpd
