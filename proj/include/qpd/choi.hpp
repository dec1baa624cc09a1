#pragma once

#include <string>
#include <vector>

#include "qpd/herm.hpp"

namespace qpd {

enum class ChoiKind { hermitian, cp, comb };

struct ProcessChoi {
  SystemLayout layout;
  HermitianMatrix matrix;
  ChoiKind kind = ChoiKind::hermitian;
};

// Checks the dimension and the claimed kind (PSD within 1e-9 for cp, valid comb within 1e-8
// for comb); throws InputError otherwise.
ProcessChoi make_process(SystemLayout layout, HermitianMatrix matrix, ChoiKind kind);

enum class TesterSet { general, fixed_entangled, nonadaptive };

// The cone is always the full PSD product; only the normalization set varies.
struct TesterSetDescriptor {
  TesterSet variant = TesterSet::general;
  bool operator==(const TesterSetDescriptor&) const = default;
};

const char* to_string(TesterSet s);
TesterSet tester_set_from_string(const std::string& s);

struct Tester {
  SystemLayout layout;
  std::vector<HermitianMatrix> elements;
  TesterSetDescriptor descriptor;

  HermitianMatrix sum() const;
};

// levels[t] lives on W_t ⊗ V_t ⊗ ... ⊗ W_1 ⊗ V_1 for t = 0..T-1; levels[0] is 1×1.
struct MarginalChain {
  std::vector<HermitianMatrix> levels;
};

struct CombReport {
  bool valid = false;
  MarginalChain chain;
  // residuals[t-1] = ‖Tr_{W_t} c_t − I_{V_t} ⊗ c_{t−1}‖_F, t = 1..T (c_0 := 1).
  std::vector<double> residuals;
  double min_eigenvalue = 0.0;
};

struct TesterReport {
  bool valid = false;
  std::vector<double> min_eigenvalues;
  // Distance-type residuals of Σ Φ_m against the normalization set, outermost first.
  std::vector<double> set_residuals;
  double max_residual() const;
};

struct MembershipReport {
  bool member = false;
  MarginalChain chain;
  std::vector<double> residuals;
};

HermitianMatrix max_entangled_choi(std::size_t n);
// Kraus operators are n_w × n_v. Result is a single-step layout, kind cp.
ProcessChoi choi_from_kraus(const std::vector<CMatrix>& kraus);
// steps[0] is step 1. Result is c^{(T)} ⊗ ... ⊗ c^{(1)}.
ProcessChoi link_tensor(const std::vector<ProcessChoi>& steps);

CombReport validate_comb(const ProcessChoi& c, double tol = 1e-8);
TesterReport validate_tester(const Tester& t, double tol = 1e-8);
std::vector<double> outcome_probs(const Tester& t, const ProcessChoi& c);
MembershipReport lin_chn_membership(const HermitianMatrix& x, const SystemLayout& layout,
                                    double tol = 1e-8);

// Residuals of sigma against the descriptor's normalization set (see TesterReport).
std::vector<double> tester_set_residuals(const HermitianMatrix& sigma, const SystemLayout& layout,
                                         const TesterSetDescriptor& descriptor);
// An element of the normalization set: the uniform one I/ΠN_V.
HermitianMatrix uniform_set_element(const SystemLayout& layout);

// Factor dims of the tester chain variable τ_t: V_t, W_{t−1}, V_{t−1}, ..., W_1, V_1.
std::vector<std::size_t> tau_dims(const SystemLayout& layout, std::size_t t);
// Factor dims of W_t ⊗ V_t ⊗ ... ⊗ W_1 ⊗ V_1.
std::vector<std::size_t> level_dims(const SystemLayout& layout, std::size_t t);
// Keep mask that drops the leading factor of dims.
std::vector<bool> drop_first(std::size_t n);

// Operator with named factors, for the general link product.
struct LabeledOperator {
  HermitianMatrix matrix;
  std::vector<std::string> labels;
  std::vector<std::size_t> dims;
};

// a * b = Tr_shared[(a^{T_shared} ⊗ I)(I ⊗ b)], contracting factors with equal labels.
// Output factors: a's unshared factors, then b's unshared factors.
LabeledOperator link_product(const LabeledOperator& a, const LabeledOperator& b);

}  // namespace qpd
