#include "qpd/io.hpp"

#include <fstream>
#include <sstream>

namespace qpd {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

cplx complex_entry(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(path, "expected a number or an [re, im] pair");
}

json complex_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> indices(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ProcessChoi step_process(const json& j, const std::string& path, const std::optional<Step>& expect) {
  ProcessChoi c;
  if (j.contains("kraus")) {
    const json& ks = j["kraus"];
    if (!ks.is_array() || ks.empty()) fail(path + ".kraus", "expected a nonempty list of matrices");
    std::vector<CMatrix> kraus;
    for (std::size_t i = 0; i < ks.size(); ++i)
      kraus.push_back(matrix_from_json(ks[i], path + ".kraus[" + std::to_string(i) + "]"));
    try {
      c = choi_from_kraus(kraus);
    } catch (const InputError& e) {
      fail(path + ".kraus", e.what());
    }
  } else if (j.contains("choi")) {
    if (!expect) fail(path, "a Choi matrix needs the layout step");
    const auto m = hermitian_from_json(j["choi"], path + ".choi");
    try {
      c = make_process(SystemLayout({*expect}), m, ChoiKind::hermitian);
    } catch (const InputError& e) {
      fail(path + ".choi", e.what());
    }
  } else {
    fail(path, "expected \"kraus\" or \"choi\"");
  }
  if (expect && !(c.layout.step(1) == *expect))
    fail(path, "dimensions differ from the layout");
  return c;
}

ProcessChoi comb_from_json(const json& j, const SystemLayout& layout, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  ProcessChoi c;
  if (j.contains("steps")) {
    const json& s = j["steps"];
    if (!s.is_array() || s.size() != layout.T()) fail(path + ".steps", "expected one entry per layout step");
    std::vector<ProcessChoi> steps;
    for (std::size_t t = 0; t < s.size(); ++t)
      steps.push_back(step_process(s[t], path + ".steps[" + std::to_string(t) + "]", layout.step(t + 1)));
    c = link_tensor(steps);
  } else if (j.contains("choi")) {
    const auto m = hermitian_from_json(j["choi"], path + ".choi");
    if (m.dim() != layout.total_dim()) fail(path + ".choi", "dimension differs from the layout");
    c = ProcessChoi{layout, m, ChoiKind::hermitian};
  } else if (j.contains("kraus")) {
    if (layout.T() != 1) fail(path, "Kraus operators describe a single step; use \"steps\"");
    c = step_process(j, path, layout.step(1));
  } else {
    fail(path, "expected \"kraus\", \"choi\" or \"steps\"");
  }
  const CombReport rep = validate_comb(c);
  if (!rep.valid) {
    std::ostringstream os;
    os << "not a valid comb (min eigenvalue " << rep.min_eigenvalue << ", marginal residuals";
    for (double r : rep.residuals) os << " " << r;
    os << ")";
    fail(path, os.str());
  }
  c.kind = ChoiKind::comb;
  return c;
}

StrategyKind strategy_from_string(const std::string& s, const std::string& path) {
  if (s == "min_error") return StrategyKind::min_error;
  if (s == "inconclusive") return StrategyKind::inconclusive;
  if (s == "unambiguous") return StrategyKind::unambiguous;
  if (s == "neyman_pearson") return StrategyKind::neyman_pearson;
  if (s == "minimax") return StrategyKind::minimax;
  fail(path, "unknown strategy \"" + s + "\"");
}

json layout_to_json(const SystemLayout& l) {
  json out = json::array();
  for (const Step& s : l.steps()) out.push_back({{"n_v", s.n_v}, {"n_w", s.n_w}});
  return out;
}

SystemLayout layout_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty list of steps");
  std::vector<Step> steps;
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string p = path + "[" + std::to_string(t) + "]";
    Step s{count(field(j[t], "n_v", p), p + ".n_v"), count(field(j[t], "n_w", p), p + ".n_w")};
    if (s.n_v == 0 || s.n_w == 0) fail(p, "dimensions must be positive");
    steps.push_back(s);
  }
  return SystemLayout(steps);
}

json tester_to_json(const Tester& t) {
  json el = json::array();
  for (const auto& e : t.elements) el.push_back(matrix_to_json(e));
  return {{"layout", layout_to_json(t.layout)},
          {"tester_set", to_string(t.descriptor.variant)},
          {"elements", el}};
}

Tester tester_from_json(const json& j, const std::string& path) {
  Tester t;
  t.layout = layout_from_json(field(j, "layout", path), path + ".layout");
  t.descriptor.variant = tester_set_from_string(field(j, "tester_set", path).get<std::string>());
  const json& el = field(j, "elements", path);
  if (!el.is_array()) fail(path + ".elements", "expected a list of matrices");
  for (std::size_t m = 0; m < el.size(); ++m) {
    t.elements.push_back(hermitian_from_json(el[m], path + ".elements[" + std::to_string(m) + "]"));
    if (t.elements.back().dim() != t.layout.total_dim())
      fail(path + ".elements[" + std::to_string(m) + "]", "dimension differs from the layout");
  }
  return t;
}

json kkt_to_json(const KktResiduals& k) {
  return {{"r_slack", k.r_slack},       {"r_comp", k.r_comp},
          {"r_lambda", k.r_lambda},     {"r_feas_primal", k.r_feas_primal},
          {"r_feas_dual", k.r_feas_dual}, {"r_comp_elementwise", k.r_comp_elementwise}};
}

KktResiduals kkt_from_json(const json& j, const std::string& path) {
  KktResiduals k;
  k.r_slack = number(field(j, "r_slack", path), path + ".r_slack");
  k.r_comp = number(field(j, "r_comp", path), path + ".r_comp");
  k.r_lambda = number(field(j, "r_lambda", path), path + ".r_lambda");
  k.r_feas_primal = number(field(j, "r_feas_primal", path), path + ".r_feas_primal");
  k.r_feas_dual = number(field(j, "r_feas_dual", path), path + ".r_feas_dual");
  k.r_comp_elementwise = number(field(j, "r_comp_elementwise", path), path + ".r_comp_elementwise");
  return k;
}

json cert_to_json(const DualCertificate& c) {
  json out = {{"chi", matrix_to_json(c.chi)}, {"q", c.q}, {"lambda", c.lambda_value},
              {"residuals", kkt_to_json(c.residuals)}};
  if (c.chain) {
    json levels = json::array();
    for (const auto& l : c.chain->levels) levels.push_back(matrix_to_json(l));
    out["chain"] = levels;
  }
  return out;
}

DualCertificate cert_from_json(const json& j, const std::string& path) {
  DualCertificate c;
  c.chi = hermitian_from_json(field(j, "chi", path), path + ".chi");
  c.q = numbers(field(j, "q", path), path + ".q");
  c.lambda_value = number(field(j, "lambda", path), path + ".lambda");
  c.residuals = kkt_from_json(field(j, "residuals", path), path + ".residuals");
  if (j.contains("chain")) {
    MarginalChain chain;
    const json& l = j["chain"];
    if (!l.is_array()) fail(path + ".chain", "expected a list of matrices");
    for (std::size_t t = 0; t < l.size(); ++t)
      chain.levels.push_back(hermitian_from_json(l[t], path + ".chain[" + std::to_string(t) + "]"));
    c.chain = chain;
  }
  return c;
}

}  // namespace

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::min_error: return "min_error";
    case StrategyKind::inconclusive: return "inconclusive";
    case StrategyKind::unambiguous: return "unambiguous";
    case StrategyKind::neyman_pearson: return "neyman_pearson";
    case StrategyKind::minimax: return "minimax";
  }
  return "?";
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json matrix_to_json(const HermitianMatrix& m) { return matrix_to_json(m.matrix()); }

CMatrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty list of rows");
  const std::string row0 = path + "[0]";
  if (!j[0].is_array() || j[0].empty()) fail(row0, "expected a nonempty row");
  const std::size_t cols = j[0].size();
  CMatrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rp, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_entry(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

HermitianMatrix hermitian_from_json(const json& j, const std::string& path) {
  const CMatrix m = matrix_from_json(j, path);
  if (m.rows() != m.cols()) fail(path, "expected a square matrix");
  try {
    return HermitianMatrix::from_matrix(m);
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

ProblemFile parse_problem(const json& j) {
  ProblemFile f;
  f.version = static_cast<int>(count(field(j, "version", "$"), "$.version"));
  if (f.version != kFileVersion) fail("$.version", "unsupported version " + std::to_string(f.version));
  f.layout = layout_from_json(field(j, "layout", "$"), "$.layout");
  const json& combs = field(j, "combs", "$");
  if (!combs.is_array() || combs.empty()) fail("$.combs", "expected a nonempty list");
  for (std::size_t r = 0; r < combs.size(); ++r)
    f.combs.push_back(comb_from_json(combs[r], f.layout, "$.combs[" + std::to_string(r) + "]"));

  const json& s = field(j, "strategy", "$");
  const json& kind = field(s, "kind", "$.strategy");
  if (!kind.is_string()) fail("$.strategy.kind", "expected a string");
  f.strategy.kind = strategy_from_string(kind.get<std::string>(), "$.strategy.kind");
  if (s.contains("priors")) f.strategy.priors = numbers(s["priors"], "$.strategy.priors");
  if (s.contains("p_inc")) f.strategy.p_inc = number(s["p_inc"], "$.strategy.p_inc");
  if (s.contains("p_np")) f.strategy.p_np = number(s["p_np"], "$.strategy.p_np");
  if (f.strategy.kind == StrategyKind::inconclusive && !s.contains("p_inc"))
    fail("$.strategy", "inconclusive needs p_inc");
  if (f.strategy.kind == StrategyKind::neyman_pearson && !s.contains("p_np"))
    fail("$.strategy", "neyman_pearson needs p_np");

  if (j.contains("tester_set")) {
    if (!j["tester_set"].is_string()) fail("$.tester_set", "expected a string");
    try {
      f.descriptor.variant = tester_set_from_string(j["tester_set"].get<std::string>());
    } catch (const InputError& e) {
      fail("$.tester_set", e.what());
    }
  }

  if (j.contains("symmetry")) {
    SymmetryBlock b;
    const json& el = field(j["symmetry"], "elements", "$.symmetry");
    if (!el.is_array() || el.empty()) fail("$.symmetry.elements", "expected a nonempty list");
    for (std::size_t g = 0; g < el.size(); ++g) {
      const std::string p = "$.symmetry.elements[" + std::to_string(g) + "]";
      b.perm_m.push_back(indices(field(el[g], "perm_m", p), p + ".perm_m"));
      b.perm_j.push_back(el[g].contains("perm_j") ? indices(el[g]["perm_j"], p + ".perm_j")
                                                  : std::vector<std::size_t>{});
      if (el[g].contains("perm_k")) b.perm_k.push_back(indices(el[g]["perm_k"], p + ".perm_k"));
      bool flag = false;
      if (el[g].contains("antiunitary")) {
        if (!el[g]["antiunitary"].is_boolean()) fail(p + ".antiunitary", "expected a boolean");
        flag = el[g]["antiunitary"].get<bool>();
      }
      b.her.push_back({matrix_from_json(field(el[g], "unitary", p), p + ".unitary"), flag});
    }
    if (!b.perm_k.empty() && b.perm_k.size() != b.her.size())
      fail("$.symmetry.elements", "perm_k must be given for every element or none");
    f.symmetry = b;
  }

  if (j.contains("unital")) {
    UnitalBlock u;
    u.R = count(field(j["unital"], "R", "$.unital"), "$.unital.R");
    u.U = matrix_from_json(field(j["unital"], "U", "$.unital"), "$.unital.U");
    f.unital = u;
  }

  // Run the module-level checks now so later commands see only valid data.
  if (f.strategy.kind == StrategyKind::minimax) {
    (void)f.minimax_spec();
  } else {
    (void)f.spec();
  }
  if (f.symmetry) (void)f.group();
  return f;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  try {
    return parse_problem(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

ProblemSpec ProblemFile::spec() const {
  const auto priors = [&] {
    try {
      return strategy.priors.empty() ? PriorWeights::uniform(combs.size()) : PriorWeights::make(strategy.priors);
    } catch (const InputError& e) {
      fail("$.strategy.priors", e.what());
    }
  };
  ProblemSpec s;
  try {
    switch (strategy.kind) {
      case StrategyKind::min_error: s = build_min_error(combs, priors()); break;
      case StrategyKind::inconclusive: s = build_inconclusive(combs, priors(), strategy.p_inc); break;
      case StrategyKind::unambiguous: s = build_unambiguous(combs, priors()); break;
      case StrategyKind::neyman_pearson:
        if (combs.size() != 2) fail("$.combs", "neyman_pearson needs exactly two combs");
        s = build_neyman_pearson(combs[0], combs[1], strategy.p_np);
        break;
      case StrategyKind::minimax:
        fail("$.strategy.kind", "minimax has no fixed-prior problem; use the minimax command");
    }
    s.descriptor = descriptor;
    s.check();
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind("$", 0) == 0) throw;
    fail("$.strategy", what);
  }
  return s;
}

MinimaxSpec ProblemFile::minimax_spec() const {
  MinimaxSpec s = minimax_min_error(combs);
  s.descriptor = descriptor;
  try {
    s.check();
  } catch (const InputError& e) {
    fail("$", e.what());
  }
  return s;
}

GroupAction ProblemFile::group() const {
  if (!symmetry) fail("$", "no symmetry block");
  try {
    return GroupAction::make(symmetry->perm_m, symmetry->perm_j, symmetry->perm_k, symmetry->her);
  } catch (const InputError& e) {
    fail("$.symmetry", e.what());
  }
}

json problem_to_json(const ProblemFile& f) {
  json combs = json::array();
  for (const auto& c : f.combs) combs.push_back({{"choi", matrix_to_json(c.matrix)}});
  json strategy = {{"kind", to_string(f.strategy.kind)}};
  if (!f.strategy.priors.empty()) strategy["priors"] = f.strategy.priors;
  if (f.strategy.kind == StrategyKind::inconclusive) strategy["p_inc"] = f.strategy.p_inc;
  if (f.strategy.kind == StrategyKind::neyman_pearson) strategy["p_np"] = f.strategy.p_np;
  json out = {{"version", f.version},
              {"layout", layout_to_json(f.layout)},
              {"combs", combs},
              {"strategy", strategy},
              {"tester_set", to_string(f.descriptor.variant)}};
  if (f.symmetry) {
    json el = json::array();
    for (std::size_t g = 0; g < f.symmetry->her.size(); ++g) {
      json e = {{"perm_m", f.symmetry->perm_m[g]},
                {"perm_j", f.symmetry->perm_j[g]},
                {"unitary", matrix_to_json(f.symmetry->her[g].u)},
                {"antiunitary", f.symmetry->her[g].transpose_first}};
      if (!f.symmetry->perm_k.empty()) e["perm_k"] = f.symmetry->perm_k[g];
      el.push_back(e);
    }
    out["symmetry"] = {{"elements", el}};
  }
  if (f.unital) out["unital"] = {{"R", f.unital->R}, {"U", matrix_to_json(f.unital->U)}};
  return out;
}

json report_to_json(const Report& r) {
  json out = {{"command", r.command},
              {"status", r.status},
              {"value", r.value},
              {"dual_value", r.dual_value},
              {"gap", r.gap},
              {"iterations", {{"primal", r.iterations_primal}, {"dual", r.iterations_dual}}},
              {"tester_residuals", r.tester_residuals},
              {"extra", r.extra},
              {"timing", {{"wall_seconds", r.wall_seconds}}}};
  if (r.tester) out["tester"] = tester_to_json(*r.tester);
  if (r.cert) out["certificate"] = cert_to_json(*r.cert);
  if (r.kkt) out["kkt"] = kkt_to_json(*r.kkt);
  if (!r.mu.empty()) out["mu"] = r.mu;
  return out;
}

Report report_from_json(const json& j) {
  Report r;
  r.command = field(j, "command", "$").get<std::string>();
  r.status = field(j, "status", "$").get<std::string>();
  r.value = number(field(j, "value", "$"), "$.value");
  r.dual_value = number(field(j, "dual_value", "$"), "$.dual_value");
  r.gap = number(field(j, "gap", "$"), "$.gap");
  const json& it = field(j, "iterations", "$");
  r.iterations_primal = count(field(it, "primal", "$.iterations"), "$.iterations.primal");
  r.iterations_dual = count(field(it, "dual", "$.iterations"), "$.iterations.dual");
  r.tester_residuals = numbers(field(j, "tester_residuals", "$"), "$.tester_residuals");
  r.extra = field(j, "extra", "$");
  if (j.contains("timing")) r.wall_seconds = number(field(j["timing"], "wall_seconds", "$.timing"), "$.timing.wall_seconds");
  if (j.contains("tester")) r.tester = tester_from_json(j["tester"], "$.tester");
  if (j.contains("certificate")) r.cert = cert_from_json(j["certificate"], "$.certificate");
  if (j.contains("kkt")) r.kkt = kkt_from_json(j["kkt"], "$.kkt");
  if (j.contains("mu")) r.mu = numbers(j["mu"], "$.mu");
  return r;
}

std::string report_body(const Report& r) {
  json j = report_to_json(r);
  j.erase("timing");
  return j.dump(2);
}

}  // namespace qpd
