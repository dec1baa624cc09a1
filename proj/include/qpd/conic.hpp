#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qpd/herm.hpp"

namespace qpd {

enum class ConeKind { psd, free, nonneg };
enum class Sense { maximize, minimize };

struct VarBlock {
  std::string name;
  ConeKind kind = ConeKind::free;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t herm_dim = 0;  // nonzero when the block stores svec of a d×d Hermitian matrix
};

// optimize ⟨objective, x⟩ s.t. A x = rhs, x in the product of the block cones.
struct ConicProgram {
  std::vector<VarBlock> blocks;
  std::size_t num_vars = 0;
  std::size_t num_rows = 0;
  std::vector<double> A;  // row-major num_rows × num_vars
  std::vector<double> rhs;
  std::vector<double> objective;
  Sense sense = Sense::maximize;

  const VarBlock& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
  HermitianMatrix matrix(const std::vector<double>& x, const std::string& name) const;
  std::vector<double> values(const std::vector<double>& x, const std::string& name) const;
  double evaluate(const std::vector<double>& x) const;
};

class ProgramBuilder {
 public:
  using HermMap = std::function<HermitianMatrix(const HermitianMatrix&)>;
  // L(X) for a Hermitian block X.
  struct MatrixTerm {
    std::size_t block;
    HermMap map;
  };
  // x_index · coeff for an entry of a real block.
  struct ScalarTerm {
    std::size_t block;
    std::size_t index;
    HermitianMatrix coeff;
  };
  // ⟨coeff, X⟩ for a Hermitian block X.
  struct InnerTerm {
    std::size_t block;
    HermitianMatrix coeff;
  };
  // coeff · x_index for an entry of a real block.
  struct EntryTerm {
    std::size_t block;
    std::size_t index;
    double coeff;
  };

  std::size_t add_psd(const std::string& name, std::size_t d);
  std::size_t add_free_hermitian(const std::string& name, std::size_t d);
  std::size_t add_free(const std::string& name, std::size_t n);
  std::size_t add_nonneg(const std::string& name, std::size_t n);

  // Σ L_i(X_i) + Σ x_k C_k = rhs, one row per real coordinate of the out_dim × out_dim result.
  void add_matrix_equality(std::size_t out_dim, const std::vector<MatrixTerm>& terms,
                           const std::vector<ScalarTerm>& scalars, const HermitianMatrix& rhs);
  // Σ ⟨C_i, X_i⟩ + Σ w_k x_k = rhs
  void add_scalar_equality(const std::vector<InnerTerm>& terms,
                           const std::vector<EntryTerm>& entries, double rhs);

  void add_objective(const InnerTerm& term);
  void add_objective(const EntryTerm& term);

  ConicProgram build(Sense sense);

 private:
  std::size_t add_block(const std::string& name, ConeKind kind, std::size_t length,
                        std::size_t herm_dim);
  std::vector<double>& new_row();

  ConicProgram p_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::pair<std::size_t, double>> objective_terms_;
  bool frozen_ = false;
};

enum class SolveStatus { optimal, max_iter, infeasible_suspected };
const char* to_string(SolveStatus s);

struct IterateView {
  std::size_t iteration;
  const std::vector<double>& cone_point;     // in the cone, affine constraints approximate
  const std::vector<double>& affine_point;   // satisfies A x = rhs
};

struct SolveOptions {
  double eps_abs = 1e-9;
  double eps_rel = 1e-7;
  std::size_t max_iter = 200000;
  double rho = 1.0;
  double alpha = 1.6;  // over-relaxation, 1 disables
  std::size_t balance_every = 50;
  std::size_t max_rho_updates = 40;  // residual balancing can otherwise cycle
  std::size_t stagnation_window = 5000;
  std::size_t observe_every = 0;
  std::function<void(const IterateView&)> observer;
};

struct SolveReport {
  double objective = 0.0;
  std::vector<double> x;  // final cone iterate
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  std::size_t dropped_rows = 0;  // linearly dependent equalities removed before solving
};

// ADMM between the affine set (projection through orthonormalized constraint rows, i.e. a QR
// factorization of Aᵀ) and the cone product.
SolveReport solve(const ConicProgram& p, const SolveOptions& opts = {});

}  // namespace qpd
