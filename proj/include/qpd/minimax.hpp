#pragma once

#include <vector>

#include "qpd/compile.hpp"
#include "qpd/symmetry.hpp"

namespace qpd {

// maximize min_k Q_k(Φ), Q_k(Φ) = Σ_m ⟨Φ_m, c_{k,m}⟩, over testers with η_j(Φ) ≤ 0.
struct MinimaxSpec {
  SystemLayout layout;
  std::size_t M = 0;
  std::size_t K = 0;
  std::size_t J = 0;
  std::vector<std::vector<HermitianMatrix>> c;  // K × M
  std::vector<std::vector<HermitianMatrix>> a;  // J × M
  std::vector<double> b;
  TesterSetDescriptor descriptor;

  void check() const;
  double Q(std::size_t k, const Tester& t) const;
  double Q(const std::vector<double>& mu, const Tester& t) const;
  // The fixed-prior problem with c_m = Σ_k μ_k c_{k,m}.
  ProblemSpec at_prior(const std::vector<double>& mu) const;
};

// Payoffs c_{k,m} = δ_{km} c_k: the prior-free version of min-error discrimination of the combs.
MinimaxSpec minimax_min_error(const std::vector<ProcessChoi>& combs);

struct SaddleReport {
  bool saddle = false;
  double q_opt_mu = 0.0;            // optimal value of the fixed-prior problem at μ
  std::vector<double> Q;            // Q_k(Φ)
  double dominance_violation = 0.0; // max_k (Q^opt(μ) − Q_k(Φ))₊
  double support_violation = 0.0;   // max over μ_k > 0 of Q_k(Φ) − min_k Q_k(Φ)
};

struct MinimaxSolution {
  Tester tester;
  std::vector<double> mu;
  double value = 0.0;            // min_k Q_k(Φ)
  double saddle_residual = 0.0;  // max(0, Q^opt(μ) − min_k Q_k(Φ))
  SaddleReport report;
  SolveReport solve_report;
};

MinimaxSolution solve_minimax(const MinimaxSpec& spec, const SolveOptions& opts = {});
SaddleReport verify_saddle(const Tester& t, const std::vector<double>& mu, const MinimaxSpec& spec,
                           double tol = 1e-4, const SolveOptions& opts = {});
// μ♮_k = (1/|G|) Σ_g μ_{g·k}.
std::vector<double> twirl_mu(const std::vector<double>& mu, const GroupAction& action);

}  // namespace qpd
