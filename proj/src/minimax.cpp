#include "qpd/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpd {

void MinimaxSpec::check() const {
  if (K < 1) throw InputError("minimax needs K ≥ 1");
  if (c.size() != K) throw InputError("payoff families differ from K");
  for (const auto& row : c)
    if (row.size() != M) throw InputError("payoff family has the wrong number of outcomes");
  at_prior(std::vector<double>(K, 1.0 / static_cast<double>(K))).check();
}

double MinimaxSpec::Q(std::size_t k, const Tester& t) const {
  if (t.elements.size() != M) throw InputError("tester has the wrong number of outcomes");
  double s = 0.0;
  for (std::size_t m = 0; m < M; ++m) s += inner(t.elements[m], c[k][m]);
  return s;
}

double MinimaxSpec::Q(const std::vector<double>& mu, const Tester& t) const {
  if (mu.size() != K) throw InputError("μ has the wrong length");
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) s += mu[k] * Q(k, t);
  return s;
}

ProblemSpec MinimaxSpec::at_prior(const std::vector<double>& mu) const {
  if (mu.size() != K) throw InputError("μ has the wrong length");
  ProblemSpec s;
  s.layout = layout;
  s.M = M;
  s.J = J;
  s.a = a;
  s.b = b;
  s.descriptor = descriptor;
  const std::size_t d = layout.total_dim();
  s.c.assign(M, HermitianMatrix(d));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) s.c[m] += mu[k] * c[k][m];
  return s;
}

MinimaxSpec minimax_min_error(const std::vector<ProcessChoi>& combs) {
  const ProblemSpec base = build_min_error(combs, PriorWeights::uniform(combs.size()));
  MinimaxSpec s;
  s.layout = base.layout;
  s.M = s.K = combs.size();
  const std::size_t d = s.layout.total_dim();
  s.c.assign(s.K, std::vector<HermitianMatrix>(s.M, HermitianMatrix(d)));
  for (std::size_t k = 0; k < s.K; ++k) s.c[k][k] = combs[k].matrix;
  return s;
}

namespace {

std::vector<double> all_Q(const MinimaxSpec& spec, const Tester& t) {
  std::vector<double> q(spec.K);
  for (std::size_t k = 0; k < spec.K; ++k) q[k] = spec.Q(k, t);
  return q;
}

// Uniform weights on {k : Q_k ≤ min Q + tol}.
std::vector<double> active_set_prior(const std::vector<double>& q, double tol) {
  const double lo = *std::min_element(q.begin(), q.end());
  std::vector<double> mu(q.size(), 0.0);
  double n = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k)
    if (q[k] <= lo + tol) {
      mu[k] = 1.0;
      n += 1.0;
    }
  for (double& v : mu) v /= n;
  return mu;
}

std::vector<double> dual_prior(const MinimaxSpec& spec, const SolveOptions& opts) {
  const ConicProgram p = compile_prior_dual(spec.at_prior(std::vector<double>(spec.K, 0.0)), spec.c);
  const SolveReport r = solve(p, opts);
  std::vector<double> mu = p.values(r.x, "mu");
  double s = 0.0;
  for (double& v : mu) {
    v = std::max(0.0, v);
    s += v;
  }
  if (!(s > 0.0)) return std::vector<double>(spec.K, 1.0 / static_cast<double>(spec.K));
  for (double& v : mu) v /= s;
  return mu;
}

}  // namespace

SaddleReport verify_saddle(const Tester& t, const std::vector<double>& mu, const MinimaxSpec& spec,
                           double tol, const SolveOptions& opts) {
  spec.check();
  SaddleReport r;
  r.q_opt_mu = solve_primal(spec.at_prior(mu), opts).value;
  r.Q = all_Q(spec, t);
  const double lo = *std::min_element(r.Q.begin(), r.Q.end());
  for (std::size_t k = 0; k < spec.K; ++k) {
    r.dominance_violation = std::max(r.dominance_violation, r.q_opt_mu - r.Q[k]);
    if (mu[k] > 1e-9) r.support_violation = std::max(r.support_violation, r.Q[k] - lo);
  }
  r.saddle = r.dominance_violation <= tol && r.support_violation <= tol;
  return r;
}

MinimaxSolution solve_minimax(const MinimaxSpec& spec, const SolveOptions& opts) {
  spec.check();
  ProgramBuilder b;
  const TesterVars v = add_tester_variables(b, spec.layout, spec.descriptor, spec.M);
  const std::size_t tau = b.add_free("epigraph", 1);
  const std::size_t slack = b.add_nonneg("slack", spec.K + spec.J);
  add_tester_constraints(b, spec.layout, spec.descriptor, v);
  // Q_k(Φ) − τ − s_k = 0
  for (std::size_t k = 0; k < spec.K; ++k) {
    std::vector<ProgramBuilder::InnerTerm> terms;
    for (std::size_t m = 0; m < spec.M; ++m) terms.push_back({v.phi[m], spec.c[k][m]});
    b.add_scalar_equality(terms, {{tau, 0, -1.0}, {slack, k, -1.0}}, 0.0);
  }
  for (std::size_t j = 0; j < spec.J; ++j) {
    std::vector<ProgramBuilder::InnerTerm> terms;
    for (std::size_t m = 0; m < spec.M; ++m) terms.push_back({v.phi[m], spec.a[j][m]});
    b.add_scalar_equality(terms, {{slack, spec.K + j, 1.0}}, spec.b[j]);
  }
  b.add_objective(ProgramBuilder::EntryTerm{tau, 0, 1.0});
  const ConicProgram p = b.build(Sense::maximize);

  MinimaxSolution sol;
  sol.solve_report = solve(p, opts);
  sol.tester.layout = spec.layout;
  sol.tester.descriptor = spec.descriptor;
  for (std::size_t m = 0; m < spec.M; ++m)
    sol.tester.elements.push_back(p.matrix(sol.solve_report.x, "phi" + std::to_string(m)));
  const std::vector<double> q = all_Q(spec, sol.tester);
  sol.value = *std::min_element(q.begin(), q.end());

  const double scale = std::max(1.0, std::abs(sol.value));
  std::vector<std::vector<double>> candidates;
  for (double tol : {1e-6, 1e-5, 1e-4}) {
    std::vector<double> mu = active_set_prior(q, tol * scale);
    if (std::find(candidates.begin(), candidates.end(), mu) == candidates.end())
      candidates.push_back(std::move(mu));
  }
  bool done = false;
  for (const auto& mu : candidates) {
    sol.mu = mu;
    sol.report = verify_saddle(sol.tester, mu, spec, 1e-4, opts);
    if (sol.report.saddle) {
      done = true;
      break;
    }
  }
  if (!done && spec.descriptor.variant != TesterSet::nonadaptive) {
    sol.mu = dual_prior(spec, opts);
    sol.report = verify_saddle(sol.tester, sol.mu, spec, 1e-4, opts);
  }
  sol.saddle_residual = std::max(0.0, sol.report.q_opt_mu - sol.value);
  return sol;
}

std::vector<double> twirl_mu(const std::vector<double>& mu, const GroupAction& action) {
  if (action.num_priors() != mu.size()) throw InputError("action has the wrong K");
  std::vector<double> out(mu.size(), 0.0);
  for (std::size_t g = 0; g < action.order(); ++g)
    for (std::size_t k = 0; k < mu.size(); ++k) out[k] += mu[action.k(g, k)];
  for (double& v : out) v /= static_cast<double>(action.order());
  return out;
}

}  // namespace qpd
