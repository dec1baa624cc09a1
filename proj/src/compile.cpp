#include "qpd/compile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qpd {

namespace {

using MatrixTerm = ProgramBuilder::MatrixTerm;
using ScalarTerm = ProgramBuilder::ScalarTerm;

HermitianMatrix identity_map(const HermitianMatrix& x) { return x; }

ProgramBuilder::HermMap negated_embed(std::vector<std::size_t> dims) {
  return [dims](const HermitianMatrix& x) {
    return -embed_identity(x, dims, drop_first(dims.size()));
  };
}

ProgramBuilder::HermMap trace_first(std::vector<std::size_t> dims) {
  return [dims](const HermitianMatrix& x) {
    return partial_trace(x, dims, drop_first(dims.size()));
  };
}

struct ChainVars {
  std::vector<std::size_t> omega;  // omega[t] for t = 1..T-1; omega[0] is the scalar block
  std::vector<std::size_t> lift;   // lift[t-1] for t = 1..T
};

ChainVars add_chain_variables(ProgramBuilder& b, const SystemLayout& layout) {
  const std::size_t T = layout.T();
  ChainVars v;
  v.omega.resize(T);
  v.omega[0] = b.add_free("omega0", 1);
  for (std::size_t t = 1; t < T; ++t)
    v.omega[t] = b.add_free_hermitian("omega" + std::to_string(t), product(level_dims(layout, t)));
  for (std::size_t t = 1; t <= T; ++t)
    v.lift.push_back(b.add_psd("lift" + std::to_string(t), product(tau_dims(layout, t))));
  return v;
}

// lift_t + Tr_{W_t} ω_t − I_{V_t} ⊗ ω_{t−1} = 0 with ω_T := χ, which is either the block chi
// or the constant chi_const.
void add_chain_constraints(ProgramBuilder& b, const SystemLayout& layout, const ChainVars& v,
                           std::size_t chi_block, const HermitianMatrix* chi_const) {
  const std::size_t T = layout.T();
  for (std::size_t t = T; t >= 1; --t) {
    const std::vector<std::size_t> td = tau_dims(layout, t);
    const std::size_t out = product(td);
    std::vector<MatrixTerm> terms = {{v.lift[t - 1], identity_map}};
    std::vector<ScalarTerm> scalars;
    HermitianMatrix rhs(out);
    if (t == T) {
      if (chi_const != nullptr) {
        rhs = -partial_trace(*chi_const, layout.factor_dims(), drop_first(2 * T));
      } else {
        terms.push_back({chi_block, trace_first(layout.factor_dims())});
      }
    } else {
      terms.push_back({v.omega[t], trace_first(level_dims(layout, t))});
    }
    if (t >= 2) {
      terms.push_back({v.omega[t - 1], negated_embed(td)});
    } else {
      scalars.push_back({v.omega[0], 0, -HermitianMatrix::identity(out)});
    }
    b.add_matrix_equality(out, terms, scalars, rhs);
  }
}

}  // namespace

TesterVars add_tester_variables(ProgramBuilder& b, const SystemLayout& layout,
                                const TesterSetDescriptor& descriptor, std::size_t M) {
  TesterVars v;
  const std::size_t d = layout.total_dim();
  for (std::size_t m = 0; m < M; ++m) v.phi.push_back(b.add_psd("phi" + std::to_string(m), d));
  switch (descriptor.variant) {
    case TesterSet::general:
      for (std::size_t t = 1; t <= layout.T(); ++t)
        v.tau.push_back(
            b.add_free_hermitian("tau" + std::to_string(t), product(tau_dims(layout, t))));
      break;
    case TesterSet::fixed_entangled:
      break;
    case TesterSet::nonadaptive: {
      if (layout.T() != 2) throw InputError("nonadaptive tester set requires T = 2");
      v.rho = b.add_free_hermitian("rho", layout.input_dim());
      break;
    }
  }
  return v;
}

void add_tester_constraints(ProgramBuilder& b, const SystemLayout& layout,
                            const TesterSetDescriptor& descriptor, const TesterVars& v) {
  const std::size_t d = layout.total_dim();
  const std::vector<std::size_t> dims = layout.factor_dims();
  std::vector<MatrixTerm> sum_terms;
  for (std::size_t blk : v.phi) sum_terms.push_back({blk, identity_map});
  switch (descriptor.variant) {
    case TesterSet::fixed_entangled:
      b.add_matrix_equality(d, sum_terms, {}, uniform_set_element(layout));
      break;
    case TesterSet::nonadaptive: {
      const std::vector<bool> keep = {false, true, false, true};  // W2 V2 W1 V1
      sum_terms.push_back({v.rho, [dims, keep](const HermitianMatrix& x) {
                             return -embed_identity(x, dims, keep);
                           }});
      b.add_matrix_equality(d, sum_terms, {}, HermitianMatrix(d));
      b.add_scalar_equality({{v.rho, HermitianMatrix::identity(layout.input_dim())}}, {}, 1.0);
      break;
    }
    case TesterSet::general: {
      const std::size_t T = layout.T();
      sum_terms.push_back({v.tau[T - 1], negated_embed(dims)});
      b.add_matrix_equality(d, sum_terms, {}, HermitianMatrix(d));
      for (std::size_t t = T; t >= 2; --t) {
        const std::vector<std::size_t> lower = level_dims(layout, t - 1);
        const std::size_t out = product(lower);
        b.add_matrix_equality(out,
                              {{v.tau[t - 1], trace_first(tau_dims(layout, t))},
                               {v.tau[t - 2], negated_embed(lower)}},
                              {}, HermitianMatrix(out));
      }
      b.add_scalar_equality({{v.tau[0], HermitianMatrix::identity(layout.step(1).n_v)}}, {}, 1.0);
      break;
    }
  }
}

ConicProgram compile_primal(const ProblemSpec& spec) {
  spec.check();
  ProgramBuilder b;
  const TesterVars v = add_tester_variables(b, spec.layout, spec.descriptor, spec.M);
  const std::size_t slack = spec.J > 0 ? b.add_nonneg("slack", spec.J) : 0;
  add_tester_constraints(b, spec.layout, spec.descriptor, v);
  for (std::size_t j = 0; j < spec.J; ++j) {
    std::vector<ProgramBuilder::InnerTerm> terms;
    for (std::size_t m = 0; m < spec.M; ++m) terms.push_back({v.phi[m], spec.a[j][m]});
    b.add_scalar_equality(terms, {{slack, j, 1.0}}, spec.b[j]);
  }
  for (std::size_t m = 0; m < spec.M; ++m) b.add_objective({v.phi[m], spec.c[m]});
  return b.build(Sense::maximize);
}

namespace {

// The dual of the primal program; with c_km given, the payoffs become Σ_k μ_k c_{k,m} for a
// simplex variable μ (block "mu").
ConicProgram build_dual(const ProblemSpec& spec,
                        const std::vector<std::vector<HermitianMatrix>>* c_km) {
  spec.check();
  if (spec.descriptor.variant == TesterSet::nonadaptive)
    throw InputError("the dual program is not available for the nonadaptive tester set");
  const std::size_t d = spec.layout.total_dim();
  ProgramBuilder b;
  const std::size_t chi = b.add_free_hermitian("chi", d);
  const std::size_t q = spec.J > 0 ? b.add_nonneg("q", spec.J) : 0;
  const std::size_t K = c_km != nullptr ? c_km->size() : 0;
  const std::size_t mu = K > 0 ? b.add_nonneg("mu", K) : 0;
  const bool general = spec.descriptor.variant == TesterSet::general;
  ChainVars chain;
  if (general) chain = add_chain_variables(b, spec.layout);
  std::vector<std::size_t> cone;
  for (std::size_t m = 0; m < spec.M; ++m) cone.push_back(b.add_psd("cone" + std::to_string(m), d));

  // cone_m = χ − c_m + Σ_j q_j a_{j,m}
  for (std::size_t m = 0; m < spec.M; ++m) {
    std::vector<ScalarTerm> scalars;
    for (std::size_t j = 0; j < spec.J; ++j) scalars.push_back({q, j, -spec.a[j][m]});
    for (std::size_t k = 0; k < K; ++k) scalars.push_back({mu, k, (*c_km)[k][m]});
    b.add_matrix_equality(d,
                          {{cone[m], identity_map},
                           {chi, [](const HermitianMatrix& x) { return -x; }}},
                          scalars, K > 0 ? HermitianMatrix(d) : -spec.c[m]);
  }
  if (K > 0) {
    std::vector<ProgramBuilder::EntryTerm> sum;
    for (std::size_t k = 0; k < K; ++k) sum.push_back({mu, k, 1.0});
    b.add_scalar_equality({}, sum, 1.0);
  }
  if (general) {
    add_chain_constraints(b, spec.layout, chain, chi, nullptr);
    b.add_objective(ProgramBuilder::EntryTerm{chain.omega[0], 0, 1.0});
  } else {
    b.add_objective(ProgramBuilder::InnerTerm{
        chi, HermitianMatrix::identity(d) * (1.0 / spec.layout.input_dim())});
  }
  for (std::size_t j = 0; j < spec.J; ++j)
    b.add_objective(ProgramBuilder::EntryTerm{q, j, spec.b[j]});
  return b.build(Sense::minimize);
}

}  // namespace

ConicProgram compile_dual(const ProblemSpec& spec) { return build_dual(spec, nullptr); }

ConicProgram compile_prior_dual(const ProblemSpec& spec,
                                const std::vector<std::vector<HermitianMatrix>>& c_km) {
  if (c_km.empty()) throw InputError("need at least one payoff family");
  for (const auto& row : c_km)
    if (row.size() != spec.M) throw InputError("payoff family has the wrong number of outcomes");
  return build_dual(spec, &c_km);
}

ConicProgram compile_support_program(const HermitianMatrix& chi, const SystemLayout& layout) {
  if (chi.dim() != layout.total_dim()) throw InputError("χ does not match layout");
  ProgramBuilder b;
  const ChainVars chain = add_chain_variables(b, layout);
  add_chain_constraints(b, layout, chain, 0, &chi);
  b.add_objective(ProgramBuilder::EntryTerm{chain.omega[0], 0, 1.0});
  return b.build(Sense::minimize);
}

Tester unpack_tester(const ConicProgram& p, const std::vector<double>& x,
                     const ProblemSpec& spec) {
  Tester t{spec.layout, {}, spec.descriptor};
  for (std::size_t m = 0; m < spec.M; ++m)
    t.elements.push_back(p.matrix(x, "phi" + std::to_string(m)));
  return t;
}

DualCertificate unpack_dual(const ConicProgram& p, const std::vector<double>& x,
                            const ProblemSpec& spec) {
  DualCertificate cert;
  cert.chi = p.matrix(x, "chi");
  if (spec.J > 0) {
    cert.q = p.values(x, "q");
    for (double& v : cert.q) v = std::max(0.0, v);
  }
  const std::vector<HermitianMatrix> z = z_vec(cert.q, spec);
  double shift = 0.0;
  for (const auto& zm : z) shift = std::max(shift, -min_eigenvalue(cert.chi - zm));
  if (shift > 0.0) cert.chi += HermitianMatrix::identity(cert.chi.dim()) * shift;
  if (spec.descriptor.variant == TesterSet::general) {
    const std::size_t T = spec.layout.T();
    MarginalChain chain;
    chain.levels.push_back(HermitianMatrix::scalar(p.values(x, "omega0")[0]));
    for (std::size_t t = 1; t < T; ++t)
      chain.levels.push_back(p.matrix(x, "omega" + std::to_string(t)));
    cert.lambda_value = restore_support_chain(cert.chi, spec.layout, chain);
    cert.chain = chain;
  } else {
    cert.lambda_value = lambda_S(cert.chi, spec.descriptor, spec.layout).value;
  }
  return cert;
}

PrimalResult solve_primal(const ProblemSpec& spec, const SolveOptions& opts) {
  const ConicProgram p = compile_primal(spec);
  PrimalResult r;
  r.report = solve(p, opts);
  r.tester = unpack_tester(p, r.report.x, spec);
  r.value = spec.objective(r.tester);
  return r;
}

PrimalDualResult solve_primal_dual(const ProblemSpec& spec, const SolveOptions& opts) {
  PrimalDualResult r;
  const ConicProgram primal = compile_primal(spec);
  const ConicProgram dual = compile_dual(spec);
  r.primal_report = solve(primal, opts);
  r.dual_report = solve(dual, opts);
  r.tester = unpack_tester(primal, r.primal_report.x, spec);
  r.cert = unpack_dual(dual, r.dual_report.x, spec);
  r.primal_value = spec.objective(r.tester);
  r.dual_value = dual_objective(r.cert, spec);
  r.gap = std::abs(r.primal_value - r.dual_value);
  r.cert.residuals = kkt_residuals(r.tester, r.cert, spec);
  if (r.primal_report.status == SolveStatus::infeasible_suspected ||
      r.dual_report.status == SolveStatus::infeasible_suspected) {
    r.status = SolveStatus::infeasible_suspected;
  } else if (r.primal_report.status == SolveStatus::optimal &&
             r.dual_report.status == SolveStatus::optimal && r.gap <= 1e-4) {
    r.status = SolveStatus::optimal;
  } else {
    r.status = SolveStatus::max_iter;
  }
  return r;
}

}  // namespace qpd
