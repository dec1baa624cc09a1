#pragma once

#include <string>
#include <vector>

#include "qpd/io.hpp"

namespace qpd::cli {

// Exit codes of the command-line front end.
inline constexpr int kOk = 0;
inline constexpr int kNotOptimal = 1;
inline constexpr int kInputError = 2;

struct Options {
  double tol = 1e-4;
  std::size_t max_iter = 200000;
  std::string grid = "0:1:0.1";  // a:b:step
  std::string param = "p_inc";   // p_inc or p_np
  std::size_t R = 0;             // unital: overrides the file's R when nonzero
  std::size_t threads = 0;       // curve: 0 picks the hardware concurrency

  SolveOptions solve_options() const;
};

// Grid points a, a + step, ... up to b. InputError for a degenerate grid.
std::vector<double> parse_grid(const std::string& grid);

struct Outcome {
  Report report;
  int exit_code = kOk;
};

Outcome solve(const ProblemFile& f, const Options& o);
// Rows param,value,gap,iterations, one solve per grid point.
struct CurveOutcome {
  std::string csv;
  int exit_code = kOk;
};
CurveOutcome curve(const ProblemFile& f, const Options& o);
// Analytic report (JSON) and curve CSV columns x,popt,branch,two_uopt_x.
struct UnitalOutcome {
  nlohmann::json report;
  std::string csv;
  int exit_code = kOk;
};
UnitalOutcome unital(const ProblemFile& f, const Options& o);
Outcome certify(const ProblemFile& f, const Report& solution, const Options& o);
Outcome minimax(const ProblemFile& f, const Options& o);
Outcome symmetrize(const ProblemFile& f, const Report& solution, const Options& o);

std::string format_number(double v);  // 12 significant digits

}  // namespace qpd::cli
