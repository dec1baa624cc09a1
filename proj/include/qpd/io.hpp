#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpd/compile.hpp"
#include "qpd/minimax.hpp"
#include "qpd/symmetry.hpp"

namespace qpd {

// Problem files are JSON. Matrices are row-major lists of rows; an entry is a number or a
// [re, im] pair. Errors are InputError with the JSON path of the offending field.
//
// {
//   "version": 1,
//   "layout": [{"n_v": 2, "n_w": 2}],                      steps 1..T
//   "combs": [{"kraus": [K, ...]} | {"choi": X} | {"steps": [{"kraus"|"choi"}, ...]}],
//   "strategy": {"kind": "min_error" | "inconclusive" | "unambiguous" | "neyman_pearson" |
//                        "minimax",
//                "priors": [...], "p_inc": 0.0, "p_np": 0.0},
//   "tester_set": "general" | "fixed_entangled" | "nonadaptive",
//   "symmetry": {"elements": [{"perm_m": [...], "perm_j": [...], "perm_k": [...],
//                              "unitary": U, "antiunitary": false}, ...]},
//   "unital": {"R": 3, "U": U}
// }
inline constexpr int kFileVersion = 1;

enum class StrategyKind { min_error, inconclusive, unambiguous, neyman_pearson, minimax };
const char* to_string(StrategyKind k);

struct Strategy {
  StrategyKind kind = StrategyKind::min_error;
  std::vector<double> priors;  // empty means uniform
  double p_inc = 0.0;
  double p_np = 0.0;
};

struct SymmetryBlock {
  std::vector<std::vector<std::size_t>> perm_m, perm_j, perm_k;
  std::vector<HerAction> her;
};

struct UnitalBlock {
  std::size_t R = 2;
  CMatrix U;
};

struct ProblemFile {
  int version = kFileVersion;
  SystemLayout layout;
  std::vector<ProcessChoi> combs;
  Strategy strategy;
  TesterSetDescriptor descriptor;
  std::optional<SymmetryBlock> symmetry;
  std::optional<UnitalBlock> unital;

  // Fixed-prior problem; InputError for the minimax strategy.
  ProblemSpec spec() const;
  MinimaxSpec minimax_spec() const;
  // The symmetry block as a group action; InputError when absent.
  GroupAction group() const;
};

ProblemFile parse_problem(const nlohmann::json& j);
ProblemFile load_problem(const std::string& path);
nlohmann::json problem_to_json(const ProblemFile& f);

nlohmann::json matrix_to_json(const CMatrix& m);
nlohmann::json matrix_to_json(const HermitianMatrix& m);
// path names the field in error messages.
CMatrix matrix_from_json(const nlohmann::json& j, const std::string& path);
HermitianMatrix hermitian_from_json(const nlohmann::json& j, const std::string& path);

struct Report {
  std::string command;
  std::string status;  // solver status, or "pass"/"fail" for checks
  double value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  std::size_t iterations_primal = 0;
  std::size_t iterations_dual = 0;
  std::optional<Tester> tester;
  std::optional<DualCertificate> cert;
  std::optional<KktResiduals> kkt;
  std::vector<double> tester_residuals;  // validation: min eigenvalues then set residuals
  std::vector<double> mu;                // minimax priors
  nlohmann::json extra = nlohmann::json::object();
  double wall_seconds = 0.0;             // kept apart from the deterministic fields
};

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
// Deterministic fields only, for byte comparison.
std::string report_body(const Report& r);

}  // namespace qpd
