#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qpd/cli.hpp"

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw qpd::InputError(path + ": cannot write");
  out << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

qpd::Report load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qpd::InputError(path + ": cannot open");
  try {
    return qpd::report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw qpd::InputError(path + ": " + e.what());
  } catch (const qpd::InputError& e) {
    throw qpd::InputError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal discrimination of quantum processes by semidefinite programming"};
  app.require_subcommand(1);
  app.fallthrough();
  qpd::cli::Options opts;
  std::string problem, solution, out, csv;
  app.add_option("--tol", opts.tol, "tolerance for optimality and cross checks")->capture_default_str();
  app.add_option("--max-iter", opts.max_iter, "solver iteration cap")->capture_default_str();
  app.add_option("--out", out, "output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve the problem and its dual, report residuals");
  solve->add_option("problem", problem)->required();

  auto* curve = app.add_subcommand("curve", "sweep a strategy parameter, CSV output");
  curve->add_option("problem", problem)->required();
  curve->add_option("--param", opts.param, "p_inc or p_np")->capture_default_str();
  curve->add_option("--grid", opts.grid, "a:b:step")->capture_default_str();
  curve->add_option("--threads", opts.threads, "0 uses every core");

  auto* unital = app.add_subcommand("unital", "closed-form analysis of a cyclic unital qubit family");
  unital->add_option("problem", problem)->required();
  unital->add_option("--R", opts.R, "number of channels (default from the file)");
  unital->add_option("--grid", opts.grid, "a:b:step")->capture_default_str();
  unital->add_option("--csv", csv, "write the curve CSV here");

  auto* certify = app.add_subcommand("certify", "check a solution against the optimality conditions");
  certify->add_option("problem", problem)->required();
  certify->add_option("solution", solution)->required();

  auto* minimax = app.add_subcommand("minimax", "prior-free min-error discrimination");
  minimax->add_option("problem", problem)->required();

  auto* symmetrize = app.add_subcommand("symmetrize", "twirl a solution over the problem's group");
  symmetrize->add_option("problem", problem)->required();
  symmetrize->add_option("solution", solution)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qpd::cli::kInputError;
  }

  try {
    const qpd::ProblemFile f = qpd::load_problem(problem);
    if (*solve || *certify || *minimax || *symmetrize) {
      qpd::cli::Outcome o;
      if (*solve) o = qpd::cli::solve(f, opts);
      if (*certify) o = qpd::cli::certify(f, load_report(solution), opts);
      if (*minimax) o = qpd::cli::minimax(f, opts);
      if (*symmetrize) o = qpd::cli::symmetrize(f, load_report(solution), opts);
      emit(dump(qpd::report_to_json(o.report)), out);
      return o.exit_code;
    }
    if (*curve) {
      const auto c = qpd::cli::curve(f, opts);
      emit(c.csv, out);
      return c.exit_code;
    }
    const auto u = qpd::cli::unital(f, opts);
    if (!csv.empty()) emit(u.csv, csv);
    emit(dump(u.report), out);
    return u.exit_code;
  } catch (const qpd::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return qpd::cli::kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qpd::cli::kNotOptimal;
  }
}
