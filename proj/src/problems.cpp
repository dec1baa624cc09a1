#include "qpd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpd {

void ProblemSpec::check() const {
  const std::size_t d = layout.total_dim();
  if (M < 1) throw InputError("problem needs at least one outcome");
  if (c.size() != M) throw InputError("payoff count differs from M");
  if (a.size() != J || b.size() != J) throw InputError("constraint count differs from J");
  for (const auto& m : c)
    if (m.dim() != d) throw InputError("payoff matrix does not match layout");
  for (const auto& row : a) {
    if (row.size() != M) throw InputError("constraint row length differs from M");
    for (const auto& m : row)
      if (m.dim() != d) throw InputError("constraint matrix does not match layout");
  }
  if (descriptor.variant == TesterSet::nonadaptive && layout.T() != 2)
    throw InputError("nonadaptive tester set requires T = 2");
}

double ProblemSpec::objective(const Tester& t) const {
  if (t.elements.size() != M) throw InputError("tester has the wrong number of outcomes");
  double s = 0.0;
  for (std::size_t m = 0; m < M; ++m) s += inner(t.elements[m], c[m]);
  return s;
}

PriorWeights PriorWeights::make(std::vector<double> p) {
  if (p.empty()) throw InputError("empty prior");
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError("prior weights must be nonnegative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw InputError("prior weights must sum to 1");
  return PriorWeights{std::move(p)};
}

PriorWeights PriorWeights::uniform(std::size_t r) {
  if (r == 0) throw InputError("empty prior");
  return PriorWeights{std::vector<double>(r, 1.0 / static_cast<double>(r))};
}

namespace {

const SystemLayout& common_layout(const std::vector<ProcessChoi>& combs) {
  if (combs.empty()) throw InputError("no combs given");
  for (const auto& c : combs)
    if (!(c.layout == combs[0].layout)) throw InputError("combs have different layouts");
  return combs[0].layout;
}

HermitianMatrix weighted_sum(const std::vector<ProcessChoi>& combs, const PriorWeights& priors) {
  HermitianMatrix s(combs[0].matrix.dim());
  for (std::size_t r = 0; r < combs.size(); ++r) s += priors.p[r] * combs[r].matrix;
  return s;
}

void check_priors(const std::vector<ProcessChoi>& combs, const PriorWeights& priors) {
  if (priors.p.size() != combs.size()) throw InputError("prior count differs from comb count");
  (void)PriorWeights::make(priors.p);
}

}  // namespace

ProblemSpec build_min_error(const std::vector<ProcessChoi>& combs, const PriorWeights& priors) {
  ProblemSpec s;
  s.layout = common_layout(combs);
  check_priors(combs, priors);
  s.M = combs.size();
  for (std::size_t r = 0; r < combs.size(); ++r) s.c.push_back(priors.p[r] * combs[r].matrix);
  return s;
}

ProblemSpec build_inconclusive(const std::vector<ProcessChoi>& combs, const PriorWeights& priors,
                               double p_inc) {
  if (!(p_inc >= 0.0 && p_inc <= 1.0)) throw InputError("p_inc must lie in [0, 1]");
  ProblemSpec s = build_min_error(combs, priors);
  const std::size_t R = combs.size();
  const std::size_t d = s.layout.total_dim();
  s.M = R + 1;
  s.c.push_back(HermitianMatrix(d));
  s.J = 1;
  s.a.assign(1, std::vector<HermitianMatrix>(R + 1, HermitianMatrix(d)));
  s.a[0][R] = -weighted_sum(combs, priors);
  s.b = {-p_inc};
  return s;
}

ProblemSpec build_unambiguous(const std::vector<ProcessChoi>& combs, const PriorWeights& priors) {
  ProblemSpec s = build_min_error(combs, priors);
  const std::size_t R = combs.size();
  const std::size_t d = s.layout.total_dim();
  s.M = R + 1;
  s.c.push_back(HermitianMatrix(d));
  s.J = 1;
  s.a.assign(1, std::vector<HermitianMatrix>(R + 1, HermitianMatrix(d)));
  for (std::size_t r = 0; r < R; ++r) s.a[0][r] = -(priors.p[r] * combs[r].matrix);
  s.a[0][R] = -weighted_sum(combs, priors);
  s.b = {-1.0};
  return s;
}

ProblemSpec build_neyman_pearson(const ProcessChoi& c0, const ProcessChoi& c1, double p_np) {
  if (!(p_np >= 0.0 && p_np <= 1.0)) throw InputError("p_np must lie in [0, 1]");
  if (!(c0.layout == c1.layout)) throw InputError("combs have different layouts");
  ProblemSpec s;
  s.layout = c0.layout;
  const std::size_t d = s.layout.total_dim();
  s.M = 2;
  s.c = {HermitianMatrix(d), c1.matrix};
  s.J = 1;
  s.a = {{HermitianMatrix(d), c0.matrix}};
  s.b = {p_np};
  return s;
}

ChangePointProblem build_change_point(const ProcessChoi& l0, const ProcessChoi& l1,
                                      std::size_t T) {
  if (T < 1) throw InputError("change point needs T ≥ 1");
  if (l0.layout.T() != 1 || !(l0.layout == l1.layout))
    throw InputError("change point needs two single-step channels on equal dims");
  ChangePointProblem out;
  for (std::size_t r = 0; r <= T; ++r) {
    std::vector<ProcessChoi> steps;
    for (std::size_t t = 1; t <= T; ++t) steps.push_back(t > r ? l1 : l0);
    out.combs.push_back(link_tensor(steps));
  }
  out.spec = build_min_error(out.combs, PriorWeights::uniform(T + 1));
  return out;
}

namespace {

ProcessChoi tensor_power(const ProcessChoi& c, std::size_t K) {
  return link_tensor(std::vector<ProcessChoi>(K, c));
}

}  // namespace

ComparisonProblem build_comparison(const std::vector<ProcessChoi>& channels,
                                   const std::vector<double>& u, std::size_t K) {
  if (channels.empty() || channels.size() != u.size())
    throw InputError("comparison needs one weight per channel");
  if (K < 2) throw InputError("comparison needs K ≥ 2");
  double total = 0.0;
  for (double v : u) {
    if (!(v >= 0.0)) throw InputError("comparison weights must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("comparison weights must sum to 1");
  for (const auto& c : channels)
    if (c.layout.T() != 1 || !(c.layout == channels[0].layout))
      throw InputError("comparison needs single-step channels on equal dims");

  ComparisonProblem out;
  const SystemLayout layout = tensor_power(channels[0], K).layout;
  const std::size_t d = layout.total_dim();
  HermitianMatrix same(d);
  double p0 = 0.0;
  HermitianMatrix average_step(channels[0].matrix.dim());
  for (std::size_t l = 0; l < channels.size(); ++l) {
    const double w = std::pow(u[l], static_cast<double>(K));
    p0 += w;
    same += w * tensor_power(channels[l], K).matrix;
    average_step += u[l] * channels[l].matrix;
  }
  ProcessChoi avg{channels[0].layout, average_step, channels[0].kind};
  const HermitianMatrix all = tensor_power(avg, K).matrix;
  out.p_same = p0;
  out.p_different = 1.0 - p0;
  out.same = {layout, same * (1.0 / p0), ChoiKind::comb};
  if (out.p_different <= 1e-12) {
    out.trivial = true;
    out.p_same = 1.0;
    out.p_different = 0.0;
    out.spec = build_min_error({out.same}, PriorWeights::uniform(1));
    return out;
  }
  out.different = {layout, (all - same) * (1.0 / out.p_different), ChoiKind::comb};
  out.spec = build_min_error({out.same, out.different}, PriorWeights{{p0, out.p_different}});
  return out;
}

PermutationProblem build_permutation_order(const std::vector<ProcessChoi>& channels) {
  const std::size_t T = channels.size();
  if (T < 1 || T > 3) throw InputError("permutation order supports 1 ≤ T ≤ 3 channels");
  for (const auto& c : channels)
    if (c.layout.T() != 1 || !(c.layout == channels[0].layout))
      throw InputError("permutation order needs single-step channels on equal dims");
  PermutationProblem out;
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::vector<ProcessChoi> steps;
    for (std::size_t i : order) steps.push_back(channels[i]);
    out.orders.push_back(order);
    out.combs.push_back(link_tensor(steps));
  } while (std::next_permutation(order.begin(), order.end()));
  out.spec = build_min_error(out.combs, PriorWeights::uniform(out.combs.size()));
  return out;
}

std::vector<double> eta(const Tester& t, const ProblemSpec& spec) {
  if (!(t.layout == spec.layout)) throw InputError("tester and problem layouts differ");
  if (t.elements.size() != spec.M) throw InputError("tester has the wrong number of outcomes");
  std::vector<double> out(spec.J);
  for (std::size_t j = 0; j < spec.J; ++j) {
    double s = -spec.b[j];
    for (std::size_t m = 0; m < spec.M; ++m) s += inner(t.elements[m], spec.a[j][m]);
    out[j] = s;
  }
  return out;
}

}  // namespace qpd
