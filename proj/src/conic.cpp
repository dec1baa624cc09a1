#include "qpd/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpd/kernels.hpp"

namespace qpd {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::infeasible_suspected:
      return "infeasible_suspected";
  }
  return "?";
}

const VarBlock& ConicProgram::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw Error("program has no block '" + name + "'");
}

bool ConicProgram::has_block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return true;
  return false;
}

HermitianMatrix ConicProgram::matrix(const std::vector<double>& x, const std::string& name) const {
  const VarBlock& b = block(name);
  if (b.herm_dim == 0) throw Error("block '" + name + "' is not a matrix block");
  return smat(x.data() + b.offset, b.herm_dim);
}

std::vector<double> ConicProgram::values(const std::vector<double>& x,
                                         const std::string& name) const {
  const VarBlock& b = block(name);
  return std::vector<double>(x.begin() + b.offset, x.begin() + b.offset + b.length);
}

double ConicProgram::evaluate(const std::vector<double>& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < num_vars; ++i) s += objective[i] * x[i];
  return s;
}

std::size_t ProgramBuilder::add_block(const std::string& name, ConeKind kind, std::size_t length,
                                      std::size_t herm_dim) {
  if (frozen_) throw Error("variables must be added before constraints");
  VarBlock b{name, kind, p_.num_vars, length, herm_dim};
  p_.num_vars += length;
  p_.blocks.push_back(b);
  return p_.blocks.size() - 1;
}

std::size_t ProgramBuilder::add_psd(const std::string& name, std::size_t d) {
  return add_block(name, ConeKind::psd, svec_size(d), d);
}

std::size_t ProgramBuilder::add_free_hermitian(const std::string& name, std::size_t d) {
  return add_block(name, ConeKind::free, svec_size(d), d);
}

std::size_t ProgramBuilder::add_free(const std::string& name, std::size_t n) {
  return add_block(name, ConeKind::free, n, 0);
}

std::size_t ProgramBuilder::add_nonneg(const std::string& name, std::size_t n) {
  return add_block(name, ConeKind::nonneg, n, 0);
}

std::vector<double>& ProgramBuilder::new_row() {
  frozen_ = true;
  rows_.emplace_back(p_.num_vars, 0.0);
  return rows_.back();
}

void ProgramBuilder::add_matrix_equality(std::size_t out_dim, const std::vector<MatrixTerm>& terms,
                                         const std::vector<ScalarTerm>& scalars,
                                         const HermitianMatrix& rhs) {
  if (rhs.dim() != out_dim) throw Error("equality right-hand side has the wrong dimension");
  const std::size_t nrows = svec_size(out_dim);
  const std::size_t first = rows_.size();
  for (std::size_t r = 0; r < nrows; ++r) new_row();
  std::vector<double> col(nrows);
  for (const MatrixTerm& t : terms) {
    const VarBlock& b = p_.blocks.at(t.block);
    if (b.herm_dim == 0) throw Error("matrix term on a non-matrix block");
    std::vector<double> e(b.length, 0.0);
    for (std::size_t k = 0; k < b.length; ++k) {
      e[k] = 1.0;
      const HermitianMatrix img = t.map(smat(e.data(), b.herm_dim));
      e[k] = 0.0;
      if (img.dim() != out_dim) throw Error("linear map produced the wrong dimension");
      svec(img, col.data());
      for (std::size_t r = 0; r < nrows; ++r) rows_[first + r][b.offset + k] += col[r];
    }
  }
  for (const ScalarTerm& s : scalars) {
    const VarBlock& b = p_.blocks.at(s.block);
    if (s.index >= b.length) throw Error("scalar term index out of range");
    if (s.coeff.dim() != out_dim) throw Error("scalar term coefficient has the wrong dimension");
    svec(s.coeff, col.data());
    for (std::size_t r = 0; r < nrows; ++r) rows_[first + r][b.offset + s.index] += col[r];
  }
  svec(rhs, col.data());
  p_.rhs.insert(p_.rhs.end(), col.begin(), col.end());
}

void ProgramBuilder::add_scalar_equality(const std::vector<InnerTerm>& terms,
                                         const std::vector<EntryTerm>& entries, double rhs) {
  std::vector<double>& row = new_row();
  for (const InnerTerm& t : terms) {
    const VarBlock& b = p_.blocks.at(t.block);
    if (b.herm_dim != t.coeff.dim()) throw Error("inner term dimension mismatch");
    const std::vector<double> v = svec(t.coeff);
    for (std::size_t k = 0; k < b.length; ++k) row[b.offset + k] += v[k];
  }
  for (const EntryTerm& e : entries) {
    const VarBlock& b = p_.blocks.at(e.block);
    if (e.index >= b.length) throw Error("entry term index out of range");
    row[b.offset + e.index] += e.coeff;
  }
  p_.rhs.push_back(rhs);
}

void ProgramBuilder::add_objective(const InnerTerm& term) {
  const VarBlock& b = p_.blocks.at(term.block);
  if (b.herm_dim != term.coeff.dim()) throw Error("objective term dimension mismatch");
  const std::vector<double> v = svec(term.coeff);
  for (std::size_t k = 0; k < b.length; ++k) objective_terms_.emplace_back(b.offset + k, v[k]);
}

void ProgramBuilder::add_objective(const EntryTerm& term) {
  const VarBlock& b = p_.blocks.at(term.block);
  if (term.index >= b.length) throw Error("objective entry out of range");
  objective_terms_.emplace_back(b.offset + term.index, term.coeff);
}

ConicProgram ProgramBuilder::build(Sense sense) {
  ConicProgram p = p_;
  p.sense = sense;
  p.num_rows = rows_.size();
  p.A.reserve(p.num_rows * p.num_vars);
  for (const auto& r : rows_) p.A.insert(p.A.end(), r.begin(), r.end());
  p.objective.assign(p.num_vars, 0.0);
  for (const auto& [i, v] : objective_terms_) p.objective[i] += v;
  return p;
}

namespace {

struct AffineProjector {
  std::vector<double> q;     // orthonormal rows, r × n
  std::vector<double> beta;  // r
  std::size_t rows = 0;
  std::size_t n = 0;
  std::size_t dropped = 0;
  bool consistent = true;
};

// Modified Gram–Schmidt with one reorthogonalization pass.
AffineProjector orthonormalize(const ConicProgram& p) {
  const kernels::Table& k = kernels::active();
  AffineProjector out;
  out.n = p.num_vars;
  std::vector<double> row(p.num_vars);
  for (std::size_t i = 0; i < p.num_rows; ++i) {
    std::copy(p.A.begin() + i * p.num_vars, p.A.begin() + (i + 1) * p.num_vars, row.begin());
    double b = p.rhs[i];
    const double norm0 = std::sqrt(k.dot(row.data(), row.data(), out.n));
    if (norm0 == 0.0) {
      if (std::abs(b) > 1e-9) out.consistent = false;
      ++out.dropped;
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < out.rows; ++j) {
        const double* qj = out.q.data() + j * out.n;
        const double c = k.dot(qj, row.data(), out.n);
        k.axpy(-c, qj, row.data(), out.n);
        b -= c * out.beta[j];
      }
    const double norm = std::sqrt(k.dot(row.data(), row.data(), out.n));
    if (norm <= 1e-10 * norm0) {
      if (std::abs(b) > 1e-8 * std::max(1.0, std::abs(p.rhs[i]))) out.consistent = false;
      ++out.dropped;
      continue;
    }
    for (double& v : row) v /= norm;
    out.q.insert(out.q.end(), row.begin(), row.end());
    out.beta.push_back(b / norm);
    ++out.rows;
  }
  return out;
}

void project_cone(const ConicProgram& p, std::vector<double>& v) {
  for (const VarBlock& b : p.blocks) {
    double* x = v.data() + b.offset;
    switch (b.kind) {
      case ConeKind::free:
        break;
      case ConeKind::nonneg:
        for (std::size_t i = 0; i < b.length; ++i) x[i] = std::max(0.0, x[i]);
        break;
      case ConeKind::psd:
        if (b.herm_dim == 1) {
          x[0] = std::max(0.0, x[0]);
        } else {
          svec(psd_project(smat(x, b.herm_dim)), x);
        }
        break;
    }
  }
}

double norm2(const kernels::Table& k, const std::vector<double>& v) {
  return std::sqrt(k.dot(v.data(), v.data(), v.size()));
}

}  // namespace

SolveReport solve(const ConicProgram& p, const SolveOptions& opts) {
  const kernels::Table& k = kernels::active();
  const std::size_t n = p.num_vars;
  SolveReport rep;
  rep.x.assign(n, 0.0);
  const AffineProjector proj = orthonormalize(p);
  rep.dropped_rows = proj.dropped;
  if (!proj.consistent) {
    rep.status = SolveStatus::infeasible_suspected;
    rep.primal_residual = 1.0;
    project_cone(p, rep.x);
    rep.objective = p.evaluate(rep.x);
    return rep;
  }
  std::vector<double> c(p.objective);
  if (p.sense == Sense::maximize)
    for (double& v : c) v = -v;

  std::vector<double> x(n, 0.0), z(n, 0.0), u(n, 0.0), v(n), w(n), z_old(n), tmp_r(proj.rows);
  double rho = opts.rho;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double window_residual = -1.0;
  std::size_t rho_updates = 0, flat_windows = 0;
  double window_best = std::numeric_limits<double>::infinity();
  rep.status = SolveStatus::max_iter;
  std::size_t it = 0;
  double rp = 0.0, rd = 0.0, eps_p = 0.0, eps_d = 0.0, scale_p = 1.0, scale_d = 1.0;
  for (it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) v[i] = z[i] - u[i] - c[i] / rho;
    // x = v − Qᵀ(Q v − β)
    if (proj.rows > 0) {
      k.gemv(proj.q.data(), proj.rows, n, v.data(), tmp_r.data());
      for (std::size_t r = 0; r < proj.rows; ++r) tmp_r[r] -= proj.beta[r];
      k.gemv_t(proj.q.data(), proj.rows, n, tmp_r.data(), x.data());
      for (std::size_t i = 0; i < n; ++i) x[i] = v[i] - x[i];
    } else {
      x = v;
    }
    z_old.swap(z);
    for (std::size_t i = 0; i < n; ++i) w[i] = opts.alpha * x[i] + (1.0 - opts.alpha) * z_old[i] + u[i];
    z = w;
    project_cone(p, z);
    for (std::size_t i = 0; i < n; ++i) u[i] = w[i] - z[i];

    double sp = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x[i] - z[i];
      const double b = z[i] - z_old[i];
      sp += a * a;
      sd += b * b;
    }
    rp = std::sqrt(sp);
    rd = rho * std::sqrt(sd);
    scale_p = std::max(norm2(k, x), norm2(k, z));
    scale_d = rho * norm2(k, u);
    eps_p = opts.eps_abs * sqrt_n + opts.eps_rel * scale_p;
    eps_d = opts.eps_abs * sqrt_n + opts.eps_rel * scale_d;

    if (opts.observer && opts.observe_every > 0 && it % opts.observe_every == 0)
      opts.observer(IterateView{it, z, x});

    if (rp <= eps_p && rd <= eps_d) {
      rep.status = SolveStatus::optimal;
      break;
    }
    if (opts.balance_every > 0 && it % opts.balance_every == 0 && rho_updates < opts.max_rho_updates) {
      if (rp > 10.0 * rd) {
        rho *= 2.0;
        for (double& ui : u) ui *= 0.5;
        ++rho_updates;
      } else if (rd > 10.0 * rp) {
        rho *= 0.5;
        for (double& ui : u) ui *= 2.0;
        ++rho_updates;
      }
    }
    window_best = std::min(window_best, rp / std::max(1.0, scale_p));
    if (opts.stagnation_window > 0 && it % opts.stagnation_window == 0) {
      // The residual oscillates on slow but feasible instances, so compare window minima and
      // require two flat windows in a row.
      if (window_residual >= 0.0 && window_best > 1e-4 && window_best >= 0.99 * window_residual) {
        if (++flat_windows >= 2) {
          rep.status = SolveStatus::infeasible_suspected;
          break;
        }
      } else {
        flat_windows = 0;
      }
      window_residual = window_residual < 0.0 ? window_best : std::min(window_residual, window_best);
      window_best = std::numeric_limits<double>::infinity();
    }
  }
  rep.iterations = std::min(it, opts.max_iter);
  rep.primal_residual = rp / std::max(1.0, scale_p);
  rep.dual_residual = rd / std::max(1.0, scale_d);
  rep.x = z;
  rep.objective = p.evaluate(z);
  return rep;
}

}  // namespace qpd
