#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpd {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user data: wrong shapes, out-of-range parameters, malformed files.
class InputError : public Error {
 public:
  using Error::Error;
};

// Receives warnings such as asymmetric input being symmetrized. Default writes to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

// Dense complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n);
  static CMatrix from_rows(const std::vector<std::vector<cplx>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conj() const;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix kron(const CMatrix& a, const CMatrix& b);
double frobenius_norm(const CMatrix& a);
// Largest |a_ij - conj(a_ji)|; requires a square matrix.
double hermitian_violation(const CMatrix& a);

class HermitianMatrix {
 public:
  HermitianMatrix() : HermitianMatrix(1) {}
  explicit HermitianMatrix(std::size_t dim);

  static HermitianMatrix identity(std::size_t dim);
  static HermitianMatrix diagonal(const std::vector<double>& d);
  static HermitianMatrix scalar(double v);
  // Symmetrizes (m + m†)/2. Warns when the asymmetry exceeds 1e-9 and throws InputError when
  // it exceeds reject_tol.
  static HermitianMatrix from_matrix(const CMatrix& m, double reject_tol = 1e-6);
  static HermitianMatrix from_rows(const std::vector<std::vector<cplx>>& rows,
                                   double reject_tol = 1e-6);
  // v v†
  static HermitianMatrix outer(const std::vector<cplx>& v);

  std::size_t dim() const { return m_.rows(); }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  // Writes entry (i, j) and its mirror; diagonal entries keep only the real part.
  void set(std::size_t i, std::size_t j, cplx v);
  const CMatrix& matrix() const { return m_; }

  double trace() const;
  HermitianMatrix transpose() const;

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);

 private:
  CMatrix m_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a);
HermitianMatrix operator*(double s, HermitianMatrix a);
HermitianMatrix operator*(HermitianMatrix a, double s);

// Tr(XY), real for Hermitian arguments.
double inner(const HermitianMatrix& x, const HermitianMatrix& y);
double frobenius_norm(const HermitianMatrix& x);
HermitianMatrix kron(const HermitianMatrix& x, const HermitianMatrix& y);
// u x u†
HermitianMatrix conjugate_by(const CMatrix& u, const HermitianMatrix& x);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // columns
};

// Cyclic Jacobi. Deterministic.
EigenDecomposition eig_herm(const HermitianMatrix& h);
// Same, for raw input; throws InputError when h is not Hermitian within 1e-9.
EigenDecomposition eig_herm(const CMatrix& h);

HermitianMatrix psd_project(const HermitianMatrix& h);
// V f(Λ) V†
HermitianMatrix spectral_map(const HermitianMatrix& h, const std::function<double(double)>& f);
HermitianMatrix abs(const HermitianMatrix& h);
double min_eigenvalue(const HermitianMatrix& h);
double max_eigenvalue(const HermitianMatrix& h);
double trace_norm(const HermitianMatrix& h);

struct Step {
  std::size_t n_v = 1;
  std::size_t n_w = 1;
  bool operator==(const Step&) const = default;
};

// Steps t = 1..T. Flattened factor order is W_T, V_T, ..., W_1, V_1 with V_1 fastest.
class SystemLayout {
 public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Step> steps);

  std::size_t T() const { return steps_.size(); }
  const Step& step(std::size_t t) const;  // 1-based
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t total_dim() const;
  std::size_t input_dim() const;  // product of n_v
  std::vector<std::size_t> factor_dims() const;
  std::size_t w_factor(std::size_t t) const;
  std::size_t v_factor(std::size_t t) const;
  // Steps 1..t only.
  SystemLayout truncated(std::size_t t) const;

  bool operator==(const SystemLayout&) const = default;

 private:
  std::vector<Step> steps_;
};

std::size_t product(const std::vector<std::size_t>& dims);

// Traces out every factor whose keep flag is false. Kept factors retain their order.
HermitianMatrix partial_trace(const HermitianMatrix& x, const std::vector<std::size_t>& dims,
                              const std::vector<bool>& keep);
HermitianMatrix partial_trace(const HermitianMatrix& x, const SystemLayout& layout,
                              const std::vector<std::size_t>& drop_factors);
// Adjoint of partial_trace: y on the kept factors, identity on the rest.
HermitianMatrix embed_identity(const HermitianMatrix& y, const std::vector<std::size_t>& dims,
                               const std::vector<bool>& keep);
// Factor i of the result is factor perm[i] of x.
HermitianMatrix permute_factors(const HermitianMatrix& x, const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& perm);

// Real vectorization: d diagonal reals, then (re, im)·√2 for each i < j in row-major order.
// The Euclidean dot product equals Tr(XY).
std::size_t svec_size(std::size_t d);
void svec(const HermitianMatrix& x, double* out);
std::vector<double> svec(const HermitianMatrix& x);
HermitianMatrix smat(const double* in, std::size_t d);

// Singular values (descending) of a real row-major matrix by one-sided Jacobi.
std::vector<double> singular_values(std::vector<double> a, std::size_t rows, std::size_t cols);

}  // namespace qpd
