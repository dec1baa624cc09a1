#include "qpd/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qpd {

HermitianMatrix HerAction::apply(const HermitianMatrix& x) const {
  return conjugate_by(u, transpose_first ? x.transpose() : x);
}

HerAction compose(const HerAction& g, const HerAction& h) {
  return {g.u * (g.transpose_first ? h.u.conj() : h.u), g.transpose_first != h.transpose_first};
}

bool same_action(const HerAction& a, const HerAction& b, double tol) {
  if (a.transpose_first != b.transpose_first || a.u.rows() != b.u.rows()) return false;
  const std::size_t d = a.u.rows();
  cplx tr = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) tr += std::conj(a.u(k, i)) * b.u(k, i);
  if (std::abs(tr) < 0.5) return false;
  const cplx phase = tr / std::abs(tr);
  double diff = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) diff += std::norm(b.u(i, k) - phase * a.u(i, k));
  return std::sqrt(diff) <= tol * std::sqrt(static_cast<double>(d));
}

namespace {

void check_permutation(const std::vector<std::size_t>& p, const char* what) {
  std::vector<bool> seen(p.size(), false);
  for (std::size_t v : p) {
    if (v >= p.size() || seen[v]) throw InputError(std::string("not a permutation of ") + what);
    seen[v] = true;
  }
}

std::vector<std::vector<std::size_t>> fill_empty(std::vector<std::vector<std::size_t>> p,
                                                 std::size_t n) {
  if (p.empty()) p.assign(n, {});
  return p;
}

std::vector<std::size_t> apply_perm(const std::vector<std::size_t>& g,
                                    const std::vector<std::size_t>& h) {
  std::vector<std::size_t> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = g[h[i]];
  return out;
}

bool is_identity_perm(const std::vector<std::size_t>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

CMatrix random_complex(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) a(i, k) = cplx(g(rng), g(rng));
  return a;
}

HermitianMatrix random_density(std::mt19937_64& rng, std::size_t n) {
  const CMatrix a = random_complex(rng, n);
  HermitianMatrix rho = HermitianMatrix::from_matrix(a * a.adjoint());
  return rho * (1.0 / rho.trace());
}

HermitianMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
  const CMatrix a = random_complex(rng, n);
  return HermitianMatrix::from_matrix(0.5 * (a + a.adjoint()));
}

// Elements of the normalization set used to probe closure under the action.
std::vector<HermitianMatrix> set_probes(const SystemLayout& layout,
                                        const TesterSetDescriptor& descriptor) {
  std::vector<HermitianMatrix> out = {uniform_set_element(layout)};
  std::mt19937_64 rng(7);
  const std::size_t T = layout.T();
  for (int s = 0; s < 3; ++s) {
    switch (descriptor.variant) {
      case TesterSet::fixed_entangled:
        return out;
      case TesterSet::nonadaptive: {
        const std::vector<std::size_t> dims = layout.factor_dims();
        out.push_back(embed_identity(random_density(rng, layout.input_dim()), dims,
                                     {false, true, false, true}));
        break;
      }
      case TesterSet::general: {
        HermitianMatrix sigma = HermitianMatrix::scalar(1.0);
        for (std::size_t t = T; t >= 1; --t) {
          const Step& st = layout.step(t);
          sigma = kron(sigma, kron(HermitianMatrix::identity(st.n_w), random_density(rng, st.n_v)));
        }
        out.push_back(sigma);
        break;
      }
    }
  }
  return out;
}

double scaled_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
  return frobenius_norm(a - b) / std::max(1.0, frobenius_norm(b));
}

}  // namespace

GroupAction GroupAction::make(std::vector<std::vector<std::size_t>> perm_m,
                              std::vector<std::vector<std::size_t>> perm_j,
                              std::vector<std::vector<std::size_t>> perm_k,
                              std::vector<HerAction> her) {
  const std::size_t n = her.size();
  if (n == 0) throw InputError("group has no elements");
  if (n > max_order) throw InputError("group order exceeds 256");
  GroupAction a;
  a.perm_m_ = fill_empty(std::move(perm_m), n);
  a.perm_j_ = fill_empty(std::move(perm_j), n);
  a.perm_k_ = fill_empty(std::move(perm_k), n);
  a.her_ = std::move(her);
  if (a.perm_m_.size() != n || a.perm_j_.size() != n || a.perm_k_.size() != n)
    throw InputError("permutation lists differ in length from the element list");
  const std::size_t d = a.her_[0].u.rows();
  for (std::size_t g = 0; g < n; ++g) {
    check_permutation(a.perm_m_[g], "outcomes");
    check_permutation(a.perm_j_[g], "constraints");
    check_permutation(a.perm_k_[g], "priors");
    if (a.perm_m_[g].size() != a.perm_m_[0].size() || a.perm_j_[g].size() != a.perm_j_[0].size() ||
        a.perm_k_[g].size() != a.perm_k_[0].size())
      throw InputError("permutations of one index set differ in size");
    const CMatrix& u = a.her_[g].u;
    if (u.rows() != d || u.cols() != d) throw InputError("group unitaries differ in dimension");
    if (frobenius_norm(u.adjoint() * u - CMatrix::identity(d)) > 1e-9)
      throw InputError("group element is not unitary");
  }

  const auto find = [&](const std::vector<std::size_t>& pm, const std::vector<std::size_t>& pj,
                        const std::vector<std::size_t>& pk, const HerAction& h) {
    std::size_t found = n;
    for (std::size_t e = 0; e < n; ++e) {
      if (a.perm_m_[e] == pm && a.perm_j_[e] == pj && a.perm_k_[e] == pk &&
          same_action(a.her_[e], h)) {
        if (found != n) throw InputError("group element list contains duplicates");
        found = e;
      }
    }
    return found;
  };

  a.identity_ = n;
  for (std::size_t g = 0; g < n; ++g) {
    if (is_identity_perm(a.perm_m_[g]) && is_identity_perm(a.perm_j_[g]) &&
        is_identity_perm(a.perm_k_[g]) &&
        same_action(a.her_[g], HerAction{CMatrix::identity(d), false})) {
      a.identity_ = g;
      break;
    }
  }
  if (a.identity_ == n) throw InputError("group has no identity element");

  a.table_.assign(n, std::vector<std::size_t>(n));
  a.inverse_.assign(n, n);
  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t h = 0; h < n; ++h) {
      const std::size_t e = find(apply_perm(a.perm_m_[g], a.perm_m_[h]),
                                 apply_perm(a.perm_j_[g], a.perm_j_[h]),
                                 apply_perm(a.perm_k_[g], a.perm_k_[h]),
                                 qpd::compose(a.her_[g], a.her_[h]));
      if (e == n) {
        std::ostringstream os;
        os << "group is not closed: element " << g << " composed with " << h;
        throw InputError(os.str());
      }
      a.table_[g][h] = e;
      if (e == a.identity_) a.inverse_[g] = h;
    }
  }
  return a;
}

GroupAction GroupAction::trivial(std::size_t M, std::size_t J, std::size_t K, std::size_t d) {
  const auto iota = [](std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    return p;
  };
  return make({iota(M)}, {iota(J)}, {iota(K)}, {HerAction{CMatrix::identity(d), false}});
}

GroupAction dihedral_action(std::size_t R, const CMatrix& u, std::size_t n_v,
                            std::size_t extra_outcomes, std::size_t J) {
  if (R < 2) throw InputError("dihedral action needs R ≥ 2");
  if (u.rows() != u.cols()) throw InputError("rotation must be square");
  std::vector<std::vector<std::size_t>> pm, pj;
  std::vector<HerAction> her;
  std::vector<std::size_t> ident_j(J);
  for (std::size_t j = 0; j < J; ++j) ident_j[j] = j;
  for (int flip = 0; flip < 2; ++flip) {
    CMatrix ur = CMatrix::identity(u.rows());
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<std::size_t> p(R + extra_outcomes);
      for (std::size_t m = 0; m < p.size(); ++m)
        p[m] = m < R ? (r + (flip ? (R - m) % R : m)) % R : m;
      pm.push_back(p);
      pj.push_back(ident_j);
      her.push_back({kron(ur, CMatrix::identity(n_v)), flip == 1});
      ur = u * ur;
    }
  }
  return GroupAction::make(pm, pj, {}, her);
}

SymmetryReport check_symmetric(const ProblemSpec& spec, const GroupAction& action, double tol) {
  spec.check();
  if (action.num_outcomes() != spec.M || action.num_constraints() != spec.J ||
      action.dim() != spec.layout.total_dim())
    throw InputError("group action does not match the problem sizes");
  SymmetryReport rep;
  const auto record = [&](double v, const std::string& what) {
    rep.max_violation = std::max(rep.max_violation, v);
    if (v > tol && rep.violations.size() < 8) {
      std::ostringstream os;
      os << what << " (violation " << v << ")";
      rep.violations.push_back(os.str());
    }
  };
  for (std::size_t g = 0; g < action.order(); ++g) {
    for (std::size_t m = 0; m < spec.M; ++m) {
      record(scaled_diff(action.act(g, spec.c[m]), spec.c[action.m(g, m)]),
             "g=" + std::to_string(g) + ": g·c_" + std::to_string(m) + " ≠ c_" +
                 std::to_string(action.m(g, m)));
      for (std::size_t j = 0; j < spec.J; ++j)
        record(scaled_diff(action.act(g, spec.a[j][m]), spec.a[action.j(g, j)][action.m(g, m)]),
               "g=" + std::to_string(g) + ": g·a_{" + std::to_string(j) + "," +
                   std::to_string(m) + "} mismatch");
    }
    for (std::size_t j = 0; j < spec.J; ++j)
      record(std::abs(spec.b[j] - spec.b[action.j(g, j)]),
             "g=" + std::to_string(g) + ": b_" + std::to_string(j) + " mismatch");
    for (const auto& sigma : set_probes(spec.layout, spec.descriptor)) {
      double v = 0.0;
      for (double r : tester_set_residuals(action.act(g, sigma), spec.layout, spec.descriptor))
        v = std::max(v, r);
      record(v, "g=" + std::to_string(g) + " maps the normalization set outside itself");
    }
  }
  rep.symmetric = rep.max_violation <= tol;
  return rep;
}

Tester twirl_tester(const Tester& t, const GroupAction& action) {
  if (action.num_outcomes() != t.elements.size()) throw InputError("action has the wrong M");
  Tester out = t;
  const double w = 1.0 / static_cast<double>(action.order());
  for (std::size_t m = 0; m < t.elements.size(); ++m) {
    HermitianMatrix acc(t.elements[m].dim());
    for (std::size_t g = 0; g < action.order(); ++g)
      acc += action.act(action.inverse(g), t.elements[action.m(g, m)]);
    out.elements[m] = acc * w;
  }
  return out;
}

DualCertificate twirl_dual(const DualCertificate& cert, const GroupAction& action,
                           const ProblemSpec& spec) {
  if (action.num_constraints() != cert.q.size()) throw InputError("action has the wrong J");
  const double w = 1.0 / static_cast<double>(action.order());
  DualCertificate out;
  out.chi = HermitianMatrix(cert.chi.dim());
  out.q.assign(cert.q.size(), 0.0);
  for (std::size_t g = 0; g < action.order(); ++g) {
    out.chi += action.act(g, cert.chi);
    for (std::size_t j = 0; j < cert.q.size(); ++j) out.q[j] += cert.q[action.j(g, j)];
  }
  out.chi *= w;
  for (double& v : out.q) v *= w;
  const LambdaResult l = lambda_S(out.chi, spec.descriptor, spec.layout);
  out.lambda_value = l.value;
  out.chain = l.chain;
  return out;
}

IrreducibilityReport irreducible(const std::vector<HerAction>& rep) {
  if (rep.empty()) throw InputError("empty representation");
  const std::size_t d = rep[0].u.rows();
  for (const auto& g : rep)
    if (g.u.rows() != d || g.u.cols() != d) throw InputError("representation dims differ");
  for (const auto& g : rep)
    for (const auto& h : rep) {
      const HerAction gh = compose(g, h);
      if (std::none_of(rep.begin(), rep.end(),
                       [&](const HerAction& e) { return same_action(e, gh); }))
        throw InputError("representation is not closed under composition");
    }

  // Rows: svec(g·E_k − E_k) over all g; columns: the real basis E_k of Her(d).
  const std::size_t n = svec_size(d);
  std::vector<double> a(rep.size() * n * n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    const HermitianMatrix ek = smat(e.data(), d);
    e[k] = 0.0;
    for (std::size_t g = 0; g < rep.size(); ++g) {
      svec(rep[g].apply(ek) - ek, col.data());
      for (std::size_t r = 0; r < n; ++r) a[(g * n + r) * n + k] = col[r];
    }
  }
  const std::vector<double> sv = singular_values(std::move(a), rep.size() * n, n);
  const double cut = sv.empty() ? 0.0 : 1e-9 * sv.front();
  std::size_t rank = 0;
  for (double s : sv)
    if (s > cut && s > 1e-300) ++rank;
  IrreducibilityReport out;
  out.commutant_dim = n - rank;
  out.irreducible = out.commutant_dim == 1;
  return out;
}

EntangledSufficiencyReport entangled_sufficiency(const ProblemSpec& spec, const GroupAction& action,
                                                 const std::vector<StepRepresentation>& steps) {
  if (spec.descriptor.variant != TesterSet::general)
    throw InputError("the entangled-input criterion starts from the general tester set");
  const std::size_t T = spec.layout.T();
  if (steps.size() != T) throw InputError("need one input representation per step");
  EntangledSufficiencyReport out;
  out.symmetric = check_symmetric(spec, action).symmetric;
  const std::vector<std::size_t> dims = spec.layout.factor_dims();
  std::mt19937_64 rng(11);
  for (std::size_t t = 1; t <= T; ++t) {
    const StepRepresentation& s = steps[t - 1];
    if (s.elements.size() != s.input_rep.size())
      throw InputError("subgroup and representation lists differ in length");
    const std::size_t nv = spec.layout.step(t).n_v;
    std::vector<bool> keep(dims.size(), false);
    for (std::size_t i = 2 * (T - t) + 1; i < dims.size(); ++i) keep[i] = true;
    const std::size_t below = product(tau_dims(spec.layout, t)) / nv;
    for (std::size_t i = 0; i < s.elements.size(); ++i) {
      if (s.elements[i] >= action.order()) throw InputError("subgroup element out of range");
      if (s.input_rep[i].u.rows() != nv) throw InputError("input representation has wrong dim");
      const HerAction lower{kron(s.input_rep[i].u, CMatrix::identity(below)),
                            s.input_rep[i].transpose_first};
      for (int probe = 0; probe < 2; ++probe) {
        const HermitianMatrix y = random_hermitian(rng, spec.layout.total_dim());
        const HermitianMatrix lhs = partial_trace(action.act(s.elements[i], y), dims, keep);
        const HermitianMatrix rhs = lower.apply(partial_trace(y, dims, keep));
        out.factorization_residual = std::max(out.factorization_residual, scaled_diff(lhs, rhs));
      }
    }
    if (out.factorization_residual > 1e-8)
      throw InputError("the action does not reduce to the given input representation at step " +
                       std::to_string(t));
    out.step_irreducible.push_back(irreducible(s.input_rep).irreducible);
  }
  out.sufficient = out.symmetric && std::all_of(out.step_irreducible.begin(),
                                                out.step_irreducible.end(),
                                                [](bool b) { return b; });
  return out;
}

}  // namespace qpd
