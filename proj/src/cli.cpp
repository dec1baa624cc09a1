#include "qpd/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "qpd/unital.hpp"

namespace qpd::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> tester_residuals(const Tester& t) {
  const TesterReport r = validate_tester(t, 1e-6);
  std::vector<double> out = r.min_eigenvalues;
  out.insert(out.end(), r.set_residuals.begin(), r.set_residuals.end());
  return out;
}

json apex_json(const ConeApex& a) { return json::array({a.x, a.y, a.z}); }

ProblemFile with_param(ProblemFile f, const std::string& param, double v) {
  if (param == "p_inc") {
    if (f.strategy.kind != StrategyKind::inconclusive)
      throw InputError("--param p_inc needs the inconclusive strategy");
    f.strategy.p_inc = v;
  } else if (param == "p_np") {
    if (f.strategy.kind != StrategyKind::neyman_pearson)
      throw InputError("--param p_np needs the neyman_pearson strategy");
    f.strategy.p_np = v;
  } else {
    throw InputError("unknown curve parameter '" + param + "'");
  }
  return f;
}

std::vector<double> objective_values(const ProblemSpec& spec, const Tester& t) {
  std::vector<double> v;
  for (std::size_t m = 0; m < spec.M; ++m) v.push_back(inner(t.elements[m], spec.c[m]));
  return v;
}

}  // namespace

SolveOptions Options::solve_options() const {
  SolveOptions s;
  s.max_iter = max_iter;
  return s;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::vector<double> parse_grid(const std::string& grid) {
  std::vector<double> parts;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("grid '" + grid + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() != 3) throw InputError("grid '" + grid + "': expected a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!std::isfinite(a) || !std::isfinite(b) || !(step > 0.0) || b < a)
    throw InputError("grid '" + grid + "' is degenerate");
  std::vector<double> out;
  const double slack = 1e-9 * std::max(1.0, std::abs(b));
  for (std::size_t k = 0;; ++k) {
    double x = a + static_cast<double>(k) * step;
    if (x > b + slack) break;
    if (std::abs(x - b) <= slack) x = b;
    out.push_back(x);
    if (out.size() > 1000000) throw InputError("grid '" + grid + "' has too many points");
  }
  return out;
}

Outcome solve(const ProblemFile& f, const Options& o) {
  const auto t0 = Clock::now();
  const ProblemSpec spec = f.spec();
  Outcome out;
  Report& r = out.report;
  r.command = "solve";
  if (spec.descriptor.variant == TesterSet::nonadaptive) {
    const PrimalResult p = solve_primal(spec, o.solve_options());
    r.status = to_string(p.report.status);
    r.value = p.value;
    r.iterations_primal = p.report.iterations;
    r.tester = p.tester;
    r.extra["dual"] = "not available for the nonadaptive tester set";
    out.exit_code = p.report.status == SolveStatus::optimal ? kOk : kNotOptimal;
  } else {
    const PrimalDualResult p = solve_primal_dual(spec, o.solve_options());
    const bool ok = p.status == SolveStatus::optimal && p.gap <= o.tol;
    r.status = ok ? "optimal" : to_string(p.status == SolveStatus::optimal ? SolveStatus::max_iter : p.status);
    r.value = p.primal_value;
    r.dual_value = p.dual_value;
    r.gap = p.gap;
    r.iterations_primal = p.primal_report.iterations;
    r.iterations_dual = p.dual_report.iterations;
    r.tester = p.tester;
    r.cert = p.cert;
    r.kkt = p.cert.residuals;
    r.extra["kkt_pass"] = p.cert.residuals.pass(o.tol);
    out.exit_code = ok ? kOk : kNotOptimal;
  }
  r.tester_residuals = tester_residuals(*r.tester);
  r.extra["strategy"] = to_string(f.strategy.kind);
  r.extra["tester_set"] = to_string(spec.descriptor.variant);
  r.extra["outcome_values"] = objective_values(spec, *r.tester);
  r.wall_seconds = seconds_since(t0);
  return out;
}

CurveOutcome curve(const ProblemFile& f, const Options& o) {
  const std::vector<double> xs = parse_grid(o.grid);
  // Validate the parameter and every point before starting any solve.
  std::vector<ProblemSpec> specs;
  for (double x : xs) specs.push_back(with_param(f, o.param, x).spec());

  struct Row {
    double value = 0, gap = 0;
    std::size_t iterations = 0;
    bool optimal = false;
  };
  std::vector<Row> rows(xs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < xs.size();) {
      const PrimalDualResult p = solve_primal_dual(specs[i], o.solve_options());
      rows[i] = {p.primal_value, p.gap, p.primal_report.iterations + p.dual_report.iterations,
                 p.status == SolveStatus::optimal && p.gap <= o.tol};
    }
  };
  std::size_t n = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min(n, xs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  CurveOutcome out;
  std::ostringstream os;
  os << "param,value,gap,iterations\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << format_number(xs[i]) << ',' << format_number(rows[i].value) << ','
       << format_number(rows[i].gap) << ',' << rows[i].iterations << '\n';
    if (!rows[i].optimal) out.exit_code = kNotOptimal;
  }
  out.csv = os.str();
  return out;
}

UnitalOutcome unital(const ProblemFile& f, const Options& o) {
  if (!f.unital) throw InputError("$: the unital command needs a \"unital\" block with R and U");
  if (f.combs.empty()) throw InputError("$.combs: missing Λ₀");
  const std::size_t R = o.R ? o.R : f.unital->R;
  UnitalParams p;
  try {
    p = extract_params(f.combs[0], R, f.unital->U);
  } catch (const InputError& e) {
    throw InputError(std::string("$.combs[0]: ") + e.what());
  }
  UnitalOutcome out;
  json& j = out.report;
  j["R"] = R;
  j["params"] = {{"s0", p.s0}, {"s1", p.s1}, {"s2", p.s2}, {"t0", p.t0}, {"t1", p.t1}, {"t2", p.t2}};
  j["pauli"] = p.pauli();
  const Apexes a = cone_apexes(p, 1.0);
  j["upsilon00"] = apex_json(a.v00);
  j["upsilon01"] = apex_json(a.v01);
  j["upsilon11_per_q"] = apex_json(a.v11);
  std::optional<PoptCurve> closed;
  if (p.pauli() && p.s0 > 1e-12 && p.s2 > 1e-12) {
    closed = popt_curve(p);
    const Breakpoints& b = closed->bp;
    j["upsilon_prime"] = apex_json(b.upsilon_prime);
    j["q0"] = b.q0;
    j["q1"] = b.q1;
    j["sigma0"] = apex_json(b.sigma0);
    j["sigma1"] = apex_json(b.sigma1);
    j["p0"] = b.p0;
  }
  const std::vector<double> xs = parse_grid(o.grid);
  std::ostringstream csv;
  csv << "x,popt,branch,two_uopt_x\n";
  bool agree = true;
  double worst = 0.0;
  json checks = json::array();
  for (double x : xs) {
    const double analytic = closed ? closed->evaluate(x) : popt_general(p, x);
    const int branch = closed ? (x < closed->bp.p0 ? 0 : 1) : -1;
    const double u = 2.0 * uopt(p, x).x;
    csv << format_number(x) << ',' << format_number(analytic) << ',' << branch << ','
        << format_number(u) << '\n';
    if (x < 0.0 || x > 1.0) continue;
    const PrimalDualResult r = solve_primal_dual(
        build_inconclusive(p.family(), PriorWeights::uniform(R), x), o.solve_options());
    const double diff = std::abs(r.primal_value - analytic);
    worst = std::max(worst, diff);
    if (diff > o.tol || r.status != SolveStatus::optimal) agree = false;
    checks.push_back({{"p_inc", x}, {"analytic", analytic}, {"solver", r.primal_value},
                      {"status", to_string(r.status)}});
  }
  j["cross_check"] = {{"agree", agree}, {"tol", o.tol}, {"max_difference", worst}, {"points", checks}};
  out.csv = csv.str();
  out.exit_code = agree ? kOk : kNotOptimal;
  return out;
}

Outcome certify(const ProblemFile& f, const Report& solution, const Options& o) {
  const auto t0 = Clock::now();
  const ProblemSpec spec = f.spec();
  if (!solution.tester) throw InputError("solution: no tester");
  const Tester& t = *solution.tester;
  if (!(t.layout == spec.layout) || t.elements.size() != spec.M)
    throw InputError("solution: tester does not match the problem");
  Outcome out;
  Report& r = out.report;
  r.command = "certify";
  r.tester = t;
  r.tester_residuals = tester_residuals(t);
  r.value = spec.objective(t);
  KktResiduals k;
  if (solution.cert) {
    if (solution.cert->q.size() != spec.J) throw InputError("solution: q has the wrong length");
    DualCertificate c = *solution.cert;
    k = kkt_residuals(t, c, spec);
    c.residuals = k;
    r.dual_value = dual_objective(c, spec);
    r.cert = c;
  } else {
    if (spec.J != 0) throw InputError("solution: a certificate with q is needed when constraints exist");
    const TesterVerdict v = verify_tester(t, {}, spec, o.tol);
    k = v.cert.residuals;
    r.dual_value = dual_objective(v.cert, spec);
    r.cert = v.cert;
    r.extra["rcond"] = v.rcond;
  }
  r.gap = std::abs(r.value - r.dual_value);
  r.kkt = k;
  const bool pass = k.pass(o.tol);
  r.status = pass ? "pass" : "fail";
  json failed = json::array();
  if (k.r_slack > o.tol) failed.push_back("slackness");
  if (k.r_comp > o.tol) failed.push_back("cone slackness");
  if (k.r_lambda > o.tol) failed.push_back("support attainment");
  if (k.r_feas_primal > o.tol) failed.push_back("primal feasibility");
  if (k.r_feas_dual > o.tol) failed.push_back("dual feasibility");
  r.extra["failed"] = failed;
  r.wall_seconds = seconds_since(t0);
  out.exit_code = pass ? kOk : kNotOptimal;
  return out;
}

Outcome minimax(const ProblemFile& f, const Options& o) {
  const auto t0 = Clock::now();
  const MinimaxSpec spec = f.minimax_spec();
  const MinimaxSolution s = solve_minimax(spec, o.solve_options());
  Outcome out;
  Report& r = out.report;
  r.command = "minimax";
  r.value = s.value;
  r.mu = s.mu;
  r.tester = s.tester;
  r.tester_residuals = tester_residuals(s.tester);
  r.iterations_primal = s.solve_report.iterations;
  r.dual_value = s.report.q_opt_mu;
  r.gap = s.saddle_residual;
  const bool ok = s.solve_report.status == SolveStatus::optimal && s.report.saddle;
  r.status = ok ? "optimal" : to_string(s.solve_report.status == SolveStatus::optimal
                                             ? SolveStatus::max_iter
                                             : s.solve_report.status);
  r.extra["saddle"] = s.report.saddle;
  r.extra["Q"] = s.report.Q;
  r.extra["dominance_violation"] = s.report.dominance_violation;
  r.extra["support_violation"] = s.report.support_violation;
  r.wall_seconds = seconds_since(t0);
  out.exit_code = ok ? kOk : kNotOptimal;
  return out;
}

Outcome symmetrize(const ProblemFile& f, const Report& solution, const Options& o) {
  const auto t0 = Clock::now();
  const ProblemSpec spec = f.spec();
  const GroupAction g = f.group();
  if (!solution.tester) throw InputError("solution: no tester");
  const SymmetryReport sym = check_symmetric(spec, g);
  Outcome out;
  Report& r = out.report;
  r.command = "symmetrize";
  const Tester tw = twirl_tester(*solution.tester, g);
  const double before = spec.objective(*solution.tester);
  r.value = spec.objective(tw);
  r.tester = tw;
  r.tester_residuals = tester_residuals(tw);
  const double scale = std::max(1.0, std::abs(before));
  bool pass = sym.symmetric && std::abs(r.value - before) <= 1e-9 * scale;
  r.extra["symmetric"] = sym.symmetric;
  r.extra["violations"] = sym.violations;
  r.extra["value_before"] = before;
  if (solution.cert) {
    const double d_before = dual_objective(*solution.cert, spec);
    DualCertificate c = twirl_dual(*solution.cert, g, spec);
    c.residuals = kkt_residuals(tw, c, spec);
    r.dual_value = dual_objective(c, spec);
    r.gap = std::abs(r.value - r.dual_value);
    r.kkt = c.residuals;
    r.cert = c;
    r.extra["dual_value_before"] = d_before;
    r.extra["kkt_pass"] = c.residuals.pass(o.tol);
    pass = pass && r.dual_value <= d_before + 1e-9 * scale;
  }
  r.status = pass ? "pass" : "fail";
  r.wall_seconds = seconds_since(t0);
  out.exit_code = pass ? kOk : kNotOptimal;
  return out;
}

}  // namespace qpd::cli
