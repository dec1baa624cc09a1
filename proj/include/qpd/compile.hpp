#pragma once

#include <vector>

#include "qpd/certify.hpp"
#include "qpd/conic.hpp"
#include "qpd/problems.hpp"

namespace qpd {

// Blocks holding the tester and its normalization-set witnesses.
struct TesterVars {
  std::vector<std::size_t> phi;
  std::vector<std::size_t> tau;  // tau[t-1] = τ_t (general set)
  std::size_t rho = 0;           // nonadaptive set
};

TesterVars add_tester_variables(ProgramBuilder& b, const SystemLayout& layout,
                                const TesterSetDescriptor& descriptor, std::size_t M);
void add_tester_constraints(ProgramBuilder& b, const SystemLayout& layout,
                            const TesterSetDescriptor& descriptor, const TesterVars& vars);

// Blocks phi<m>, tau<t> / rho, slack (J nonnegative).
ConicProgram compile_primal(const ProblemSpec& spec);
// Blocks chi, q, omega<t>, omega0, cone<m>, lift<t>. Nonadaptive sets are rejected.
ConicProgram compile_dual(const ProblemSpec& spec);
// compile_dual with payoffs Σ_k μ_k c_km[k][m] and μ a simplex variable (block "mu"); the
// optimum is min over priors μ of the optimal value. spec supplies everything but the payoffs.
ConicProgram compile_prior_dual(const ProblemSpec& spec,
                                const std::vector<std::vector<HermitianMatrix>>& c_km);
// The nested support-function program for a fixed χ (blocks omega<t>, omega0, lift<t>).
ConicProgram compile_support_program(const HermitianMatrix& chi, const SystemLayout& layout);

Tester unpack_tester(const ConicProgram& p, const std::vector<double>& x, const ProblemSpec& spec);
// Clamps q, shifts χ by a multiple of I until χ ⪰ z_m(q), and restores the ω chain, so the
// certificate is exactly feasible and its objective an upper bound.
DualCertificate unpack_dual(const ConicProgram& p, const std::vector<double>& x,
                            const ProblemSpec& spec);

struct PrimalDualResult {
  Tester tester;
  DualCertificate cert;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::max_iter;  // optimal iff both solves are and gap ≤ 1e-4
  SolveReport primal_report;
  SolveReport dual_report;
};

PrimalDualResult solve_primal_dual(const ProblemSpec& spec, const SolveOptions& opts = {});

struct PrimalResult {
  Tester tester;
  double value = 0.0;
  SolveReport report;
};
// Primal only; the one route for the nonadaptive set.
PrimalResult solve_primal(const ProblemSpec& spec, const SolveOptions& opts = {});

}  // namespace qpd
