#include "qpd/herm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

namespace qpd {

namespace {

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return handler;
}

constexpr double kJacobiThreshold = 1e-13;
constexpr int kJacobiMaxSweeps = 100;

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  warning_handler() = std::move(handler);
}

void warn(const std::string& message) {
  if (warning_handler()) warning_handler()(message);
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::from_rows(const std::vector<std::vector<cplx>>& rows) {
  if (rows.empty()) throw InputError("matrix has no rows");
  CMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InputError("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

CMatrix CMatrix::transpose() const {
  CMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

CMatrix CMatrix::conj() const {
  CMatrix r = *this;
  for (auto& v : r.data_) v = std::conj(v);
  return r;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw InputError("matrix shape mismatch in +");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw InputError("matrix shape mismatch in -");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw InputError("matrix shape mismatch in product");
  CMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0)) continue;
      const cplx* brow = b.data() + k * b.cols();
      cplx* rrow = r.data() + i * r.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) rrow[j] += aik * brow[j];
    }
  return r;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

double frobenius_norm(const CMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) s += std::norm(a.data()[i]);
  return std::sqrt(s);
}

double hermitian_violation(const CMatrix& a) {
  if (a.rows() != a.cols()) throw InputError("Hermitian check needs a square matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst;
}

HermitianMatrix::HermitianMatrix(std::size_t dim) : m_(dim, dim) {
  if (dim == 0) throw InputError("Hermitian matrix dimension must be at least 1");
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim) {
  HermitianMatrix h(dim);
  for (std::size_t i = 0; i < dim; ++i) h.m_(i, i) = 1.0;
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
  HermitianMatrix h(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) h.m_(i, i) = d[i];
  return h;
}

HermitianMatrix HermitianMatrix::scalar(double v) { return diagonal({v}); }

HermitianMatrix HermitianMatrix::from_matrix(const CMatrix& m, double reject_tol) {
  const double violation = hermitian_violation(m);
  if (violation > reject_tol) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |a_ij - conj(a_ji)| = " << violation;
    throw InputError(os.str());
  }
  if (violation > 1e-9) {
    std::ostringstream os;
    os << "symmetrizing matrix with asymmetry " << violation;
    warn(os.str());
  }
  HermitianMatrix h(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    h.m_(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h.m_(i, j) = v;
      h.m_(j, i) = std::conj(v);
    }
  }
  return h;
}

HermitianMatrix HermitianMatrix::from_rows(const std::vector<std::vector<cplx>>& rows,
                                           double reject_tol) {
  return from_matrix(CMatrix::from_rows(rows), reject_tol);
}

HermitianMatrix HermitianMatrix::outer(const std::vector<cplx>& v) {
  HermitianMatrix h(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) h.m_(i, j) = v[i] * std::conj(v[j]);
  for (std::size_t i = 0; i < v.size(); ++i) h.m_(i, i) = h.m_(i, i).real();
  return h;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, cplx v) {
  if (i == j) {
    m_(i, i) = v.real();
  } else {
    m_(i, j) = v;
    m_(j, i) = std::conj(v);
  }
}

double HermitianMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += m_(i, i).real();
  return s;
}

HermitianMatrix HermitianMatrix::transpose() const {
  HermitianMatrix r(dim());
  r.m_ = m_.transpose();
  return r;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  m_ += o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  m_ -= o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator-(HermitianMatrix a) { return a *= -1.0; }
HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }

double inner(const HermitianMatrix& x, const HermitianMatrix& y) {
  if (x.dim() != y.dim()) throw InputError("dimension mismatch in inner product");
  // Tr(XY) = sum_ij x_ij conj(y_ij) for Hermitian y.
  const cplx* a = x.matrix().data();
  const cplx* b = y.matrix().data();
  double s = 0.0;
  const std::size_t n = x.dim() * x.dim();
  for (std::size_t i = 0; i < n; ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

double frobenius_norm(const HermitianMatrix& x) { return frobenius_norm(x.matrix()); }

HermitianMatrix kron(const HermitianMatrix& x, const HermitianMatrix& y) {
  return HermitianMatrix::from_matrix(kron(x.matrix(), y.matrix()));
}

HermitianMatrix conjugate_by(const CMatrix& u, const HermitianMatrix& x) {
  if (u.cols() != x.dim()) throw InputError("dimension mismatch in conjugation");
  return HermitianMatrix::from_matrix(u * x.matrix() * u.adjoint());
}

namespace {

EigenDecomposition jacobi(CMatrix a) {
  const std::size_t n = a.rows();
  CMatrix v = CMatrix::identity(n);
  const double scale = std::max(frobenius_norm(a), 1e-300);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(2.0 * off) <= kJacobiThreshold * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        // Phase e^{-i arg a_pq} on q makes the pivot real, then a real rotation zeroes it.
        const cplx phase = std::conj(apq) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = [[c, s], [-s·phase, c·phase]] on (p, q); A <- G† A G, V <- V G.
        const cplx g_qp = -s * phase;
        const cplx g_qq = c * phase;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * c + akq * g_qp;
          a(k, q) = akp * s + akq * g_qq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = c * apk + std::conj(g_qp) * aqk;
          a(q, k) = s * apk + std::conj(g_qq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * c + vkq * g_qp;
          v(k, q) = vkp * s + vkq * g_qq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace

EigenDecomposition eig_herm(const HermitianMatrix& h) { return jacobi(h.matrix()); }

EigenDecomposition eig_herm(const CMatrix& h) {
  const double violation = hermitian_violation(h);
  if (violation > 1e-9) {
    std::ostringstream os;
    os << "eig_herm: input is not Hermitian, max |a_ij - conj(a_ji)| = " << violation;
    throw InputError(os.str());
  }
  return eig_herm(HermitianMatrix::from_matrix(h));
}

HermitianMatrix spectral_map(const HermitianMatrix& h, const std::function<double(double)>& f) {
  const EigenDecomposition e = eig_herm(h);
  const std::size_t n = h.dim();
  CMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(e.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = fk * e.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * std::conj(e.vectors(j, k));
    }
  }
  return HermitianMatrix::from_matrix(r);
}

HermitianMatrix psd_project(const HermitianMatrix& h) {
  return spectral_map(h, [](double x) { return x > 0.0 ? x : 0.0; });
}

HermitianMatrix abs(const HermitianMatrix& h) {
  return spectral_map(h, [](double x) { return std::abs(x); });
}

double min_eigenvalue(const HermitianMatrix& h) { return eig_herm(h).values.front(); }
double max_eigenvalue(const HermitianMatrix& h) { return eig_herm(h).values.back(); }

double trace_norm(const HermitianMatrix& h) {
  double s = 0.0;
  for (double v : eig_herm(h).values) s += std::abs(v);
  return s;
}

SystemLayout::SystemLayout(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw InputError("layout needs at least one step");
  for (const Step& s : steps_)
    if (s.n_v == 0 || s.n_w == 0) throw InputError("layout dimensions must be at least 1");
}

const Step& SystemLayout::step(std::size_t t) const {
  if (t < 1 || t > steps_.size()) throw InputError("step index out of range");
  return steps_[t - 1];
}

std::size_t SystemLayout::total_dim() const {
  std::size_t d = 1;
  for (const Step& s : steps_) d *= s.n_v * s.n_w;
  return d;
}

std::size_t SystemLayout::input_dim() const {
  std::size_t d = 1;
  for (const Step& s : steps_) d *= s.n_v;
  return d;
}

std::vector<std::size_t> SystemLayout::factor_dims() const {
  std::vector<std::size_t> dims;
  for (std::size_t t = steps_.size(); t >= 1; --t) {
    dims.push_back(steps_[t - 1].n_w);
    dims.push_back(steps_[t - 1].n_v);
  }
  return dims;
}

std::size_t SystemLayout::w_factor(std::size_t t) const { return 2 * (T() - t); }
std::size_t SystemLayout::v_factor(std::size_t t) const { return 2 * (T() - t) + 1; }

SystemLayout SystemLayout::truncated(std::size_t t) const {
  if (t < 1 || t > steps_.size()) throw InputError("truncation level out of range");
  return SystemLayout(std::vector<Step>(steps_.begin(), steps_.begin() + t));
}

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) p *= d;
  return p;
}

namespace {

// For every flat index, its kept-factor index and dropped-factor index.
void split_indices(const std::vector<std::size_t>& dims, const std::vector<bool>& keep,
                   std::vector<std::size_t>& kept, std::vector<std::size_t>& dropped) {
  const std::size_t total = product(dims);
  kept.assign(total, 0);
  dropped.assign(total, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    std::size_t k = 0, kmul = 1, d = 0, dmul = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
      const std::size_t digit = rem % dims[f];
      rem /= dims[f];
      if (keep[f]) {
        k += digit * kmul;
        kmul *= dims[f];
      } else {
        d += digit * dmul;
        dmul *= dims[f];
      }
    }
    kept[flat] = k;
    dropped[flat] = d;
  }
}

void check_selection(std::size_t dim, const std::vector<std::size_t>& dims,
                     const std::vector<bool>& keep) {
  if (dims.size() != keep.size()) throw InputError("factor selection size mismatch");
  if (product(dims) != dim) throw InputError("matrix dimension does not match factor dims");
}

}  // namespace

HermitianMatrix partial_trace(const HermitianMatrix& x, const std::vector<std::size_t>& dims,
                              const std::vector<bool>& keep) {
  check_selection(x.dim(), dims, keep);
  std::size_t kdim = 1;
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (keep[f]) kdim *= dims[f];
  std::vector<std::size_t> kept, dropped;
  split_indices(dims, keep, kept, dropped);
  // Group flat indices by their dropped part.
  const std::size_t ddim = x.dim() / kdim;
  std::vector<std::vector<std::size_t>> groups(ddim);
  for (std::size_t flat = 0; flat < x.dim(); ++flat) groups[dropped[flat]].push_back(flat);
  CMatrix r(kdim, kdim);
  for (const auto& g : groups)
    for (std::size_t a : g)
      for (std::size_t b : g) r(kept[a], kept[b]) += x(a, b);
  return HermitianMatrix::from_matrix(r);
}

HermitianMatrix partial_trace(const HermitianMatrix& x, const SystemLayout& layout,
                              const std::vector<std::size_t>& drop_factors) {
  const std::vector<std::size_t> dims = layout.factor_dims();
  std::vector<bool> keep(dims.size(), true);
  for (std::size_t f : drop_factors) {
    if (f >= dims.size()) throw InputError("factor index out of range");
    keep[f] = false;
  }
  return partial_trace(x, dims, keep);
}

HermitianMatrix embed_identity(const HermitianMatrix& y, const std::vector<std::size_t>& dims,
                               const std::vector<bool>& keep) {
  if (dims.size() != keep.size()) throw InputError("factor selection size mismatch");
  std::size_t kdim = 1;
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (keep[f]) kdim *= dims[f];
  if (kdim != y.dim()) throw InputError("embedded matrix does not match kept factors");
  std::vector<std::size_t> kept, dropped;
  split_indices(dims, keep, kept, dropped);
  const std::size_t total = product(dims);
  CMatrix r(total, total);
  for (std::size_t a = 0; a < total; ++a)
    for (std::size_t b = 0; b < total; ++b)
      if (dropped[a] == dropped[b]) r(a, b) = y(kept[a], kept[b]);
  return HermitianMatrix::from_matrix(r);
}

HermitianMatrix permute_factors(const HermitianMatrix& x, const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& perm) {
  if (perm.size() != dims.size() || product(dims) != x.dim())
    throw InputError("permutation does not match factor dims");
  std::vector<std::size_t> new_dims(dims.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_dims[i] = dims[perm[i]];
  const std::size_t total = x.dim();
  // Map each new flat index to the old flat index.
  std::vector<std::size_t> to_old(total);
  std::vector<std::size_t> digits(dims.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t f = new_dims.size(); f-- > 0;) {
      digits[f] = rem % new_dims[f];
      rem /= new_dims[f];
    }
    std::vector<std::size_t> old_digits(dims.size());
    for (std::size_t i = 0; i < perm.size(); ++i) old_digits[perm[i]] = digits[i];
    std::size_t old = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) old = old * dims[f] + old_digits[f];
    to_old[flat] = old;
  }
  CMatrix r(total, total);
  for (std::size_t a = 0; a < total; ++a)
    for (std::size_t b = 0; b < total; ++b) r(a, b) = x(to_old[a], to_old[b]);
  return HermitianMatrix::from_matrix(r);
}

std::size_t svec_size(std::size_t d) { return d * d; }

void svec(const HermitianMatrix& x, double* out) {
  const std::size_t d = x.dim();
  for (std::size_t i = 0; i < d; ++i) out[i] = x(i, i).real();
  std::size_t k = d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      out[k++] = M_SQRT2 * x(i, j).real();
      out[k++] = M_SQRT2 * x(i, j).imag();
    }
}

std::vector<double> svec(const HermitianMatrix& x) {
  std::vector<double> v(svec_size(x.dim()));
  svec(x, v.data());
  return v;
}

HermitianMatrix smat(const double* in, std::size_t d) {
  HermitianMatrix h(d);
  for (std::size_t i = 0; i < d; ++i) h.set(i, i, in[i]);
  std::size_t k = d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      h.set(i, j, cplx(in[k], in[k + 1]) / M_SQRT2);
      k += 2;
    }
  return h;
}

std::vector<double> singular_values(std::vector<double> a, std::size_t rows, std::size_t cols) {
  // Work on columns of a (rows × cols); transpose first when wide so columns are few.
  if (cols > rows) {
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = a[i * cols + j];
    a.swap(t);
    std::swap(rows, cols);
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * cols + j]; };
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < cols; ++p)
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += at(i, p) * at(i, p);
          beta += at(i, q) * at(i, q);
          gamma += at(i, p) * at(i, q);
        }
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double xp = at(i, p);
          const double xq = at(i, q);
          at(i, p) = c * xp - s * xq;
          at(i, q) = s * xp + c * xq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += at(i, j) * at(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace qpd
