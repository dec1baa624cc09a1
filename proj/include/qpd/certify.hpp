#pragma once

#include <optional>
#include <vector>

#include "qpd/problems.hpp"

namespace qpd {

struct KktResiduals {
  double r_slack = 0.0;             // max_j |q_j η_j(Φ)|
  double r_comp = 0.0;              // |Σ_m ⟨Φ_m, χ − z_m(q)⟩|
  double r_lambda = 0.0;            // |Σ_m ⟨Φ_m, χ⟩ − λ_S(χ)|
  double r_feas_primal = 0.0;       // PSD, normalization-set and η ≤ 0 violations of Φ
  double r_feas_dual = 0.0;         // χ ⪰ z_m(q), q ≥ 0 and chain-witness violations
  double r_comp_elementwise = 0.0;  // max_m ‖(χ − z_m(q)) Φ_m‖_F

  double max() const;
  // The optimality conditions: slackness, cone slackness, support attainment, feasibility.
  bool pass(double tol) const;
};

struct DualCertificate {
  HermitianMatrix chi;
  std::vector<double> q;
  double lambda_value = 0.0;
  std::optional<MarginalChain> chain;  // ω_0..ω_{T−1}, general tester set only
  KktResiduals residuals;
};

double dual_objective(const DualCertificate& cert, const ProblemSpec& spec);

std::vector<HermitianMatrix> z_vec(const std::vector<double>& q, const ProblemSpec& spec);

struct LambdaResult {
  double value = 0.0;
  std::optional<MarginalChain> chain;
};

// sup over the normalization set of ⟨φ, χ⟩.
LambdaResult lambda_S(const HermitianMatrix& chi, const TesterSetDescriptor& descriptor,
                      const SystemLayout& layout);
// The nested program evaluated with the conic solver, for any T (used as a cross-check of the
// T = 1 closed form).
LambdaResult lambda_SG_nested(const HermitianMatrix& chi, const SystemLayout& layout);

// Raises each ω_t by multiples of the identity, top level first, until
// Tr_{W_T} χ ⪯ I ⊗ ω_{T−1} and Tr_{W_t} ω_t ⪯ I ⊗ ω_{t−1} hold. Returns ω_0.
double restore_support_chain(const HermitianMatrix& chi, const SystemLayout& layout,
                             MarginalChain& chain);
// Largest eigenvalue violation of the nested constraints (0 when the chain is a witness).
double support_chain_violation(const HermitianMatrix& chi, const SystemLayout& layout,
                               const MarginalChain& chain);

KktResiduals kkt_residuals(const Tester& t, const DualCertificate& cert, const ProblemSpec& spec);

// χ^Φ(q) = [Σ z_m(q) Φ_m](Σ Φ_m)^{-1}. Throws Error when the reciprocal condition number of
// Σ Φ_m is below 1e-10; the computed value is written to rcond when given.
HermitianMatrix chi_from_tester(const Tester& t, const std::vector<double>& q,
                                const ProblemSpec& spec, double* rcond = nullptr);

struct TesterVerdict {
  bool optimal = false;
  DualCertificate cert;  // built from χ^Φ(q)
  double rcond = 0.0;
};
// Decides optimality of Φ from Φ and q alone via χ^Φ(q).
TesterVerdict verify_tester(const Tester& t, const std::vector<double>& q, const ProblemSpec& spec,
                            double tol = 1e-4);

// Moves χ into the span of combs without changing λ_SG; the result satisfies χ ⪰ χ′.
DualCertificate lift_to_comb_span(const DualCertificate& cert, const SystemLayout& layout);

struct EntangledVerdict {
  bool entangled_optimal = false;
  HermitianMatrix abs_delta;
  HermitianMatrix chi;  // ½(p0 c0 + p1 c1 + |Δ|)
  double value = 0.0;   // Tr χ / ΠN_V, the optimum over maximally entangled inputs
};
EntangledVerdict entangled_optimality_binary(const ProcessChoi& c0, const ProcessChoi& c1,
                                             double p0, double p1);

struct PrimalDualResult;

struct NestedSetReport {
  double value_small = 0.0;  // optimum with the smaller normalization set
  double value_large = 0.0;
  bool equal_values = false;            // (1)
  bool lambda_equal_witness = false;    // (2)
  bool large_optimum_is_small_optimal = false;  // (3), at the returned optimum only
  bool comb_span_witness = false;       // (4)
};
// small ⊆ large; both results must come from solve_primal_dual on specs that differ only in
// the descriptor.
NestedSetReport nested_set_predicates(const ProblemSpec& small, const ProblemSpec& large,
                                    const PrimalDualResult& small_result,
                                    const PrimalDualResult& large_result, double tol = 1e-4);

}  // namespace qpd
