#pragma once

#include <string>
#include <vector>

#include "qpd/certify.hpp"

namespace qpd {

// X ↦ U X U†, with X replaced by Xᵀ first when transpose_first is set (an anti-unitary action).
struct HerAction {
  CMatrix u;
  bool transpose_first = false;

  HermitianMatrix apply(const HermitianMatrix& x) const;
};

// g∘h, i.e. the action x ↦ g·(h·x).
HerAction compose(const HerAction& g, const HerAction& h);
// Equal up to a global phase of the unitary.
bool same_action(const HerAction& a, const HerAction& b, double tol = 1e-9);

// A finite group given by its element list. Element g maps outcome m to perm_m[g][m], constraint
// j to perm_j[g][j] and prior index k to perm_k[g][k]; perm_k may be empty.
class GroupAction {
 public:
  static constexpr std::size_t max_order = 256;

  // Derives the composition table by matching permutations, unitaries up to phase and flags.
  // Throws InputError when the elements are not closed under composition, have no identity,
  // or the unitaries are not unitary.
  static GroupAction make(std::vector<std::vector<std::size_t>> perm_m,
                          std::vector<std::vector<std::size_t>> perm_j,
                          std::vector<std::vector<std::size_t>> perm_k,
                          std::vector<HerAction> her);
  static GroupAction trivial(std::size_t M, std::size_t J, std::size_t K, std::size_t d);

  std::size_t order() const { return her_.size(); }
  std::size_t identity() const { return identity_; }
  std::size_t compose(std::size_t g, std::size_t h) const { return table_[g][h]; }
  std::size_t inverse(std::size_t g) const { return inverse_[g]; }
  std::size_t m(std::size_t g, std::size_t m) const { return perm_m_[g][m]; }
  std::size_t j(std::size_t g, std::size_t j) const { return perm_j_[g][j]; }
  std::size_t k(std::size_t g, std::size_t k) const { return perm_k_[g][k]; }
  std::size_t num_outcomes() const { return perm_m_.empty() ? 0 : perm_m_[0].size(); }
  std::size_t num_constraints() const { return perm_j_.empty() ? 0 : perm_j_[0].size(); }
  std::size_t num_priors() const { return perm_k_.empty() ? 0 : perm_k_[0].size(); }
  std::size_t dim() const { return her_.empty() ? 0 : her_[0].u.rows(); }
  const HerAction& her(std::size_t g) const { return her_[g]; }
  HermitianMatrix act(std::size_t g, const HermitianMatrix& x) const { return her_[g].apply(x); }

 private:
  std::vector<std::vector<std::size_t>> perm_m_, perm_j_, perm_k_;
  std::vector<HerAction> her_;
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
};

// Dihedral group of order 2R for R cyclic single-step processes plus one trailing outcome
// (e.g. inconclusive) that stays fixed. Rotation r: m ↦ m ⊕ r, x ↦ Ad_{U^r ⊗ I}(x).
// Reflection: m ↦ −m mod R, x ↦ xᵀ. extra_outcomes outcomes after the first R are fixed;
// constraints are fixed.
GroupAction dihedral_action(std::size_t R, const CMatrix& u, std::size_t n_v,
                            std::size_t extra_outcomes, std::size_t J);

struct SymmetryReport {
  bool symmetric = false;
  double max_violation = 0.0;
  std::vector<std::string> violations;  // first few failing relations, human readable
};
SymmetryReport check_symmetric(const ProblemSpec& spec, const GroupAction& action,
                               double tol = 1e-9);

// Φ♮_m = (1/|G|) Σ_g g⁻¹·Φ_{g·m}, so that g·Φ♮_m = Φ♮_{g·m}.
Tester twirl_tester(const Tester& t, const GroupAction& action);
// χ♮ = (1/|G|) Σ_g g·χ, q♮_j = (1/|G|) Σ_g q_{g·j}; λ is re-evaluated for spec's descriptor.
DualCertificate twirl_dual(const DualCertificate& cert, const GroupAction& action,
                           const ProblemSpec& spec);

struct IrreducibilityReport {
  bool irreducible = false;
  std::size_t commutant_dim = 0;  // real dimension of the Hermitian commutant
};
// Throws InputError when the set is not closed under composition up to phase.
IrreducibilityReport irreducible(const std::vector<HerAction>& rep);

// Per-step data for the entangled-input criterion: a subgroup (element indices into the action)
// and its input-side representation, listed in the same order.
struct StepRepresentation {
  std::vector<std::size_t> elements;
  std::vector<HerAction> input_rep;
};

struct EntangledSufficiencyReport {
  bool sufficient = false;
  bool symmetric = false;
  std::vector<bool> step_irreducible;
  double factorization_residual = 0.0;
};
// Checks that Tr over the factors above V_t of h·Y equals the input-side action on V_t tensored
// with the identity below, on random probes. Throws InputError when it does not (the action does
// not factor as required).
EntangledSufficiencyReport entangled_sufficiency(const ProblemSpec& spec, const GroupAction& action,
                                                 const std::vector<StepRepresentation>& steps);

}  // namespace qpd
