#include "qpd/choi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpd {

const char* to_string(TesterSet s) {
  switch (s) {
    case TesterSet::general:
      return "general";
    case TesterSet::fixed_entangled:
      return "fixed_entangled";
    case TesterSet::nonadaptive:
      return "nonadaptive";
  }
  return "?";
}

TesterSet tester_set_from_string(const std::string& s) {
  if (s == "general") return TesterSet::general;
  if (s == "fixed_entangled") return TesterSet::fixed_entangled;
  if (s == "nonadaptive") return TesterSet::nonadaptive;
  throw InputError("unknown tester set '" + s + "'");
}

HermitianMatrix Tester::sum() const {
  if (elements.empty()) throw InputError("tester has no elements");
  HermitianMatrix s(elements[0].dim());
  for (const auto& e : elements) s += e;
  return s;
}

double TesterReport::max_residual() const {
  double r = 0.0;
  for (double v : set_residuals) r = std::max(r, v);
  return r;
}

std::vector<std::size_t> level_dims(const SystemLayout& layout, std::size_t t) {
  std::vector<std::size_t> dims;
  for (std::size_t s = t; s >= 1; --s) {
    dims.push_back(layout.step(s).n_w);
    dims.push_back(layout.step(s).n_v);
  }
  return dims;
}

std::vector<std::size_t> tau_dims(const SystemLayout& layout, std::size_t t) {
  std::vector<std::size_t> dims = level_dims(layout, t);
  dims.erase(dims.begin());
  return dims;
}

std::vector<bool> drop_first(std::size_t n) {
  std::vector<bool> keep(n, true);
  keep[0] = false;
  return keep;
}

ProcessChoi make_process(SystemLayout layout, HermitianMatrix matrix, ChoiKind kind) {
  if (matrix.dim() != layout.total_dim())
    throw InputError("Choi matrix dimension does not match its layout");
  ProcessChoi c{std::move(layout), std::move(matrix), kind};
  if (kind == ChoiKind::cp && min_eigenvalue(c.matrix) < -1e-9)
    throw InputError("Choi matrix declared CP is not PSD");
  if (kind == ChoiKind::comb) {
    const CombReport r = validate_comb(c, 1e-8);
    if (!r.valid) {
      std::ostringstream os;
      os << "matrix is not a valid comb (min eigenvalue " << r.min_eigenvalue << ", residuals";
      for (double v : r.residuals) os << " " << v;
      os << ")";
      throw InputError(os.str());
    }
  }
  return c;
}

HermitianMatrix max_entangled_choi(std::size_t n) {
  if (n == 0) throw InputError("dimension must be at least 1");
  HermitianMatrix h(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h.set(i * n + i, j * n + j, 1.0);
  return h;
}

ProcessChoi choi_from_kraus(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw InputError("empty Kraus list");
  const std::size_t nw = kraus[0].rows();
  const std::size_t nv = kraus[0].cols();
  if (nw == 0 || nv == 0) throw InputError("empty Kraus operator");
  CMatrix c(nw * nv, nw * nv);
  for (const CMatrix& k : kraus) {
    if (k.rows() != nw || k.cols() != nv) throw InputError("Kraus operators have mixed shapes");
    // Row-major vec(K) indexes (w, v) as w·n_v + v, matching W ⊗ V.
    const cplx* vk = k.data();
    for (std::size_t a = 0; a < nw * nv; ++a)
      for (std::size_t b = 0; b < nw * nv; ++b) c(a, b) += vk[a] * std::conj(vk[b]);
  }
  return {SystemLayout({Step{nv, nw}}), HermitianMatrix::from_matrix(c), ChoiKind::cp};
}

ProcessChoi link_tensor(const std::vector<ProcessChoi>& steps) {
  if (steps.empty()) throw InputError("link_tensor needs at least one step");
  std::vector<Step> layout_steps;
  bool all_cp = true;
  bool all_comb = true;
  for (const auto& s : steps) {
    for (const Step& st : s.layout.steps()) layout_steps.push_back(st);
    all_cp = all_cp && s.kind != ChoiKind::hermitian;
    all_comb = all_comb && s.kind == ChoiKind::comb;
  }
  SystemLayout layout(layout_steps);
  if (layout.total_dim() > 4096) throw InputError("link_tensor result exceeds dimension 4096");
  HermitianMatrix m = steps.back().matrix;
  for (std::size_t i = steps.size() - 1; i-- > 0;) m = kron(m, steps[i].matrix);
  return {layout, m,
          all_comb ? ChoiKind::comb : (all_cp ? ChoiKind::cp : ChoiKind::hermitian)};
}

namespace {

// Forced chain ω_t := Tr_{W_{t+1} V_{t+1}} ω_{t+1} / N_{V_{t+1}} from ω_T = x, and the
// residuals ‖Tr_{W_t} ω_t − I_{V_t} ⊗ ω_{t−1}‖ (with ω_0 replaced by 1 when unit_bottom).
void forced_chain(const HermitianMatrix& x, const SystemLayout& layout, bool unit_bottom,
                  MarginalChain& chain, std::vector<double>& residuals) {
  const std::size_t T = layout.T();
  std::vector<HermitianMatrix> omega(T + 1);
  omega[T] = x;
  for (std::size_t t = T; t >= 1; --t) {
    std::vector<std::size_t> dims = level_dims(layout, t);
    std::vector<bool> keep(dims.size(), true);
    keep[0] = keep[1] = false;
    omega[t - 1] = partial_trace(omega[t], dims, keep) * (1.0 / layout.step(t).n_v);
  }
  residuals.assign(T, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    const std::vector<std::size_t> dims = level_dims(layout, t);
    const HermitianMatrix traced = partial_trace(omega[t], dims, drop_first(dims.size()));
    const HermitianMatrix lower =
        (t == 1 && unit_bottom) ? HermitianMatrix::identity(1) : omega[t - 1];
    const std::vector<std::size_t> tdims = tau_dims(layout, t);
    const HermitianMatrix expected = embed_identity(lower, tdims, drop_first(tdims.size()));
    residuals[t - 1] = frobenius_norm(traced - expected);
  }
  chain.levels.assign(omega.begin(), omega.begin() + T);
}

}  // namespace

CombReport validate_comb(const ProcessChoi& c, double tol) {
  CombReport r;
  if (c.matrix.dim() != c.layout.total_dim())
    throw InputError("Choi matrix dimension does not match its layout");
  forced_chain(c.matrix, c.layout, true, r.chain, r.residuals);
  r.min_eigenvalue = min_eigenvalue(c.matrix);
  r.valid = r.min_eigenvalue >= -tol;
  for (double v : r.residuals) r.valid = r.valid && v <= tol;
  return r;
}

MembershipReport lin_chn_membership(const HermitianMatrix& x, const SystemLayout& layout,
                                    double tol) {
  if (x.dim() != layout.total_dim()) throw InputError("matrix does not match layout");
  MembershipReport r;
  forced_chain(x, layout, false, r.chain, r.residuals);
  const double scale = std::max(1.0, frobenius_norm(x));
  r.member = true;
  for (double v : r.residuals) r.member = r.member && v <= tol * scale;
  return r;
}

HermitianMatrix uniform_set_element(const SystemLayout& layout) {
  return HermitianMatrix::identity(layout.total_dim()) * (1.0 / layout.input_dim());
}

std::vector<double> tester_set_residuals(const HermitianMatrix& sigma, const SystemLayout& layout,
                                         const TesterSetDescriptor& descriptor) {
  if (sigma.dim() != layout.total_dim()) throw InputError("tester does not match layout");
  std::vector<double> res;
  switch (descriptor.variant) {
    case TesterSet::fixed_entangled:
      res.push_back(frobenius_norm(sigma - uniform_set_element(layout)));
      break;
    case TesterSet::nonadaptive: {
      if (layout.T() != 2) throw InputError("nonadaptive tester set requires T = 2");
      const std::vector<std::size_t> dims = layout.factor_dims();  // W2 V2 W1 V1
      const std::vector<bool> keep = {false, true, false, true};
      const double nw = static_cast<double>(dims[0] * dims[2]);
      const HermitianMatrix rho = partial_trace(sigma, dims, keep) * (1.0 / nw);
      res.push_back(frobenius_norm(sigma - embed_identity(rho, dims, keep)));
      res.push_back(std::abs(rho.trace() - 1.0));
      break;
    }
    case TesterSet::general: {
      const std::size_t T = layout.T();
      const std::vector<std::size_t> dims = layout.factor_dims();
      HermitianMatrix tau =
          partial_trace(sigma, dims, drop_first(dims.size())) * (1.0 / layout.step(T).n_w);
      res.push_back(frobenius_norm(sigma - embed_identity(tau, dims, drop_first(dims.size()))));
      for (std::size_t t = T; t >= 2; --t) {
        const std::vector<std::size_t> td = tau_dims(layout, t);
        const HermitianMatrix traced = partial_trace(tau, td, drop_first(td.size()));
        const std::vector<std::size_t> lower = level_dims(layout, t - 1);
        const HermitianMatrix next =
            partial_trace(traced, lower, drop_first(lower.size())) *
            (1.0 / layout.step(t - 1).n_w);
        res.push_back(
            frobenius_norm(traced - embed_identity(next, lower, drop_first(lower.size()))));
        tau = next;
      }
      res.push_back(std::abs(tau.trace() - 1.0));
      break;
    }
  }
  return res;
}

TesterReport validate_tester(const Tester& t, double tol) {
  TesterReport r;
  if (t.elements.empty()) throw InputError("tester has no elements");
  r.valid = true;
  for (const auto& e : t.elements) {
    if (e.dim() != t.layout.total_dim()) throw InputError("tester element does not match layout");
    const double m = min_eigenvalue(e);
    r.min_eigenvalues.push_back(m);
    r.valid = r.valid && m >= -tol;
  }
  r.set_residuals = tester_set_residuals(t.sum(), t.layout, t.descriptor);
  r.valid = r.valid && r.max_residual() <= tol;
  return r;
}

std::vector<double> outcome_probs(const Tester& t, const ProcessChoi& c) {
  if (!(t.layout == c.layout)) throw InputError("tester and comb layouts differ");
  std::vector<double> p;
  for (const auto& e : t.elements) p.push_back(inner(e, c.matrix));
  return p;
}

namespace {

std::size_t flat_index(const std::vector<std::size_t>& dims,
                       const std::vector<std::size_t>& digits) {
  std::size_t idx = 0;
  for (std::size_t f = 0; f < dims.size(); ++f) idx = idx * dims[f] + digits[f];
  return idx;
}

void unflatten(std::size_t flat, const std::vector<std::size_t>& dims,
               std::vector<std::size_t>& digits) {
  digits.resize(dims.size());
  for (std::size_t f = dims.size(); f-- > 0;) {
    digits[f] = flat % dims[f];
    flat /= dims[f];
  }
}

}  // namespace

LabeledOperator link_product(const LabeledOperator& a, const LabeledOperator& b) {
  if (a.labels.size() != a.dims.size() || b.labels.size() != b.dims.size() ||
      product(a.dims) != a.matrix.dim() || product(b.dims) != b.matrix.dim())
    throw InputError("labeled operator shape mismatch");
  // Positions of shared factors in a and b, and of the unshared ones.
  std::vector<std::size_t> a_shared, b_shared, a_own, b_own;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
    if (it == b.labels.end()) {
      a_own.push_back(i);
    } else {
      const std::size_t j = static_cast<std::size_t>(it - b.labels.begin());
      if (a.dims[i] != b.dims[j]) throw InputError("shared factor '" + a.labels[i] + "' differs");
      a_shared.push_back(i);
      b_shared.push_back(j);
    }
  }
  for (std::size_t j = 0; j < b.labels.size(); ++j)
    if (std::find(b_shared.begin(), b_shared.end(), j) == b_shared.end()) b_own.push_back(j);

  LabeledOperator out;
  for (std::size_t i : a_own) {
    out.labels.push_back(a.labels[i]);
    out.dims.push_back(a.dims[i]);
  }
  for (std::size_t j : b_own) {
    out.labels.push_back(b.labels[j]);
    out.dims.push_back(b.dims[j]);
  }
  std::vector<std::size_t> y_dims;
  for (std::size_t i : a_shared) y_dims.push_back(a.dims[i]);
  const std::size_t dout = product(out.dims);
  const std::size_t dy = product(y_dims);

  // out[(x,z),(x',z')] = Σ_{y,y''} a[(x,y''),(x',y)] · b[(y'',z),(y,z')]
  CMatrix r(dout, dout);
  std::vector<std::size_t> row_d, col_d, y1, y2;
  std::vector<std::size_t> ad(a.dims.size()), bd(b.dims.size());
  for (std::size_t row = 0; row < dout; ++row) {
    unflatten(row, out.dims, row_d);
    for (std::size_t col = 0; col < dout; ++col) {
      unflatten(col, out.dims, col_d);
      cplx acc = 0.0;
      for (std::size_t yi = 0; yi < dy; ++yi) {
        unflatten(yi, y_dims, y1);
        for (std::size_t yj = 0; yj < dy; ++yj) {
          unflatten(yj, y_dims, y2);
          // a row (x, y''=y2), a col (x', y=y1)
          for (std::size_t k = 0; k < a_own.size(); ++k) ad[a_own[k]] = row_d[k];
          for (std::size_t k = 0; k < a_shared.size(); ++k) ad[a_shared[k]] = y2[k];
          const std::size_t ar = flat_index(a.dims, ad);
          for (std::size_t k = 0; k < a_own.size(); ++k) ad[a_own[k]] = col_d[k];
          for (std::size_t k = 0; k < a_shared.size(); ++k) ad[a_shared[k]] = y1[k];
          const std::size_t ac = flat_index(a.dims, ad);
          // b row (y''=y2, z), b col (y=y1, z')
          for (std::size_t k = 0; k < b_own.size(); ++k) bd[b_own[k]] = row_d[a_own.size() + k];
          for (std::size_t k = 0; k < b_shared.size(); ++k) bd[b_shared[k]] = y2[k];
          const std::size_t br = flat_index(b.dims, bd);
          for (std::size_t k = 0; k < b_own.size(); ++k) bd[b_own[k]] = col_d[a_own.size() + k];
          for (std::size_t k = 0; k < b_shared.size(); ++k) bd[b_shared[k]] = y1[k];
          const std::size_t bc = flat_index(b.dims, bd);
          acc += a.matrix(ar, ac) * b.matrix(br, bc);
        }
      }
      r(row, col) = acc;
    }
  }
  out.matrix = HermitianMatrix::from_matrix(r);
  return out;
}

}  // namespace qpd
