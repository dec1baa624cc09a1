#pragma once

#include <vector>

#include "qpd/choi.hpp"

namespace qpd {

// maximize Σ_m ⟨Φ_m, c_m⟩ s.t. Φ_m ⪰ 0, Σ_m Φ_m ∈ S, η_j(Φ) ≤ 0.
struct ProblemSpec {
  SystemLayout layout;
  std::size_t M = 0;
  std::size_t J = 0;
  std::vector<HermitianMatrix> c;               // M
  std::vector<std::vector<HermitianMatrix>> a;  // J × M
  std::vector<double> b;                        // J
  TesterSetDescriptor descriptor;

  // Throws InputError on inconsistent sizes or dimensions.
  void check() const;
  double objective(const Tester& t) const;
};

struct PriorWeights {
  std::vector<double> p;
  // Throws InputError unless p ≥ 0 and Σ p = 1 within 1e-12.
  static PriorWeights make(std::vector<double> p);
  static PriorWeights uniform(std::size_t r);
};

ProblemSpec build_min_error(const std::vector<ProcessChoi>& combs, const PriorWeights& priors);
ProblemSpec build_inconclusive(const std::vector<ProcessChoi>& combs, const PriorWeights& priors,
                               double p_inc);
ProblemSpec build_unambiguous(const std::vector<ProcessChoi>& combs, const PriorWeights& priors);
ProblemSpec build_neyman_pearson(const ProcessChoi& c0, const ProcessChoi& c1, double p_np);

struct ChangePointProblem {
  std::vector<ProcessChoi> combs;  // combs[r]: steps t ≤ r use l0, later steps use l1
  ProblemSpec spec;
};
ChangePointProblem build_change_point(const ProcessChoi& l0, const ProcessChoi& l1,
                                      std::size_t T);

struct ComparisonProblem {
  ProcessChoi same;       // mixture over identical-channel sequences
  ProcessChoi different;  // the remainder; unset when trivial
  double p_same = 1.0;
  double p_different = 0.0;
  bool trivial = false;  // all weight on identical sequences (e.g. a single channel)
  ProblemSpec spec;      // min-error over {same, different}; for trivial, just {same}
};
ComparisonProblem build_comparison(const std::vector<ProcessChoi>& channels,
                                   const std::vector<double>& u, std::size_t K);

struct PermutationProblem {
  std::vector<std::vector<std::size_t>> orders;  // orders[r][t-1] = channel used at step t
  std::vector<ProcessChoi> combs;
  ProblemSpec spec;
};
// Discriminates the order in which T ≤ 3 channels are applied; uniform priors.
PermutationProblem build_permutation_order(const std::vector<ProcessChoi>& channels);

std::vector<double> eta(const Tester& t, const ProblemSpec& spec);

}  // namespace qpd
