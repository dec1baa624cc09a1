#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "qpd/cli.hpp"
#include "qpd/unital.hpp"

using namespace qpd;

namespace {

std::string data(const std::string& name) { return std::string(QPD_TEST_DATA) + "/" + name; }

std::vector<std::vector<double>> csv_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("problem files load and validate") {
  const auto f = load_problem(data("unital_triple.json"));
  CHECK(f.combs.size() == 3u);
  CHECK(f.strategy.kind == StrategyKind::inconclusive);
  CHECK(f.symmetry.has_value());
  CHECK(f.group().order() == 6u);
  CHECK(f.unital->R == 3u);
  CHECK(check_symmetric(f.spec(), f.group()).symmetric);

  // Round trip through JSON keeps the problem.
  const auto again = parse_problem(problem_to_json(f));
  for (std::size_t r = 0; r < 3; ++r)
    CHECK(frobenius_norm(again.combs[r].matrix - f.combs[r].matrix) == 0.0);
}

TEST_CASE("parse errors name the offending field") {
  try {
    load_problem(data("malformed.json"));
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("$.combs[1].kraus[0][0][1]") != std::string::npos);
  }
  auto j = nlohmann::json::parse(R"({"version": 1, "layout": [{"n_v": 2, "n_w": 2}],
      "combs": [{"choi": [[1.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}],
      "strategy": {"kind": "min_error"}})");
  CHECK_THROWS_WITH_AS(parse_problem(j), doctest::Contains("$.combs[0]"), InputError);
  j["combs"][0] = {{"kraus", {{{1, 0}, {0, 1}}}}};
  j["strategy"]["kind"] = "guess";
  CHECK_THROWS_WITH_AS(parse_problem(j), doctest::Contains("$.strategy.kind"), InputError);
  j["strategy"] = {{"kind", "inconclusive"}};
  CHECK_THROWS_WITH_AS(parse_problem(j), doctest::Contains("p_inc"), InputError);
  j["strategy"] = {{"kind", "min_error"}, {"priors", {0.9, 0.9}}};
  CHECK_THROWS_AS(parse_problem(j), InputError);
  j["strategy"] = {{"kind", "min_error"}};
  j["version"] = 7;
  CHECK_THROWS_WITH_AS(parse_problem(j), doctest::Contains("$.version"), InputError);
}

TEST_CASE("multi-step combs from per-step channels") {
  auto j = nlohmann::json::parse(R"({"version": 1, "layout": [{"n_v": 2, "n_w": 2}, {"n_v": 2, "n_w": 2}],
      "combs": [{"steps": [{"kraus": [[[1, 0], [0, 1]]]}, {"kraus": [[[0, 1], [1, 0]]]}]},
                {"steps": [{"kraus": [[[0, 1], [1, 0]]]}, {"kraus": [[[1, 0], [0, 1]]]}]}],
      "strategy": {"kind": "min_error"}})");
  const auto f = parse_problem(j);
  CHECK(f.combs[0].matrix.dim() == 16u);
  CHECK(validate_comb(f.combs[1]).valid);
}

TEST_CASE("solve command") {
  const auto f = load_problem(data("identity_vs_x.json"));
  const auto o = cli::solve(f, {});
  CHECK(o.exit_code == cli::kOk);
  CHECK(o.report.status == "optimal");
  CHECK(o.report.value == doctest::Approx(1.0).epsilon(1e-6));

  const auto g = load_problem(data("unital_triple.json"));
  const auto u = cli::solve(g, {});
  CHECK(u.report.value == doctest::Approx(7.0 / 15).epsilon(1e-4));
  CHECK(u.report.kkt->pass(1e-4));

  // Reports round-trip and are byte-identical across runs apart from timing.
  const auto back = report_from_json(report_to_json(u.report));
  CHECK(report_to_json(back) == report_to_json(u.report));
  CHECK(report_body(cli::solve(g, {}).report) == report_body(u.report));
  // Every emitted tester re-validates after reload.
  CHECK(validate_tester(*back.tester, 1e-6).valid);

  cli::Options tight;
  tight.max_iter = 5;
  CHECK(cli::solve(g, tight).exit_code == cli::kNotOptimal);
}

TEST_CASE("curve command") {
  const auto f = load_problem(data("unital_triple.json"));
  const auto c = cli::curve(f, {});
  CHECK(c.exit_code == cli::kOk);
  const auto rows = csv_rows(c.csv);
  REQUIRE(rows.size() == 11u);
  const auto p = extract_params(f.combs[0], 3, f.unital->U);
  const auto analytic = popt_curve(p);
  for (const auto& r : rows) {
    REQUIRE(r.size() == 4u);
    CHECK(std::abs(r[1] - analytic.evaluate(r[0])) < 1e-4);
  }
  CHECK(std::abs(rows.back()[1]) <= 1e-4);
  CHECK(c.csv.rfind("param,value,gap,iterations\n", 0) == 0);

  cli::Options one;
  one.grid = "0.2:0.5:1";
  CHECK(csv_rows(cli::curve(f, one).csv).size() == 1u);
  cli::Options bad;
  bad.grid = "0:1:0";
  CHECK_THROWS_AS(cli::curve(f, bad), InputError);
  bad.grid = "0:1";
  CHECK_THROWS_AS(cli::curve(f, bad), InputError);
  bad.grid = "0:1:0.5";
  bad.param = "p_np";
  CHECK_THROWS_AS(cli::curve(f, bad), InputError);
}

TEST_CASE("grid parsing") {
  const auto g = cli::parse_grid("0:1:0.1");
  REQUIRE(g.size() == 11u);
  CHECK(g.back() == 1.0);
  CHECK(cli::parse_grid("0.3:0.3:0.1").size() == 1u);
  CHECK_THROWS_AS(cli::parse_grid("a:1:0.1"), InputError);
  CHECK(cli::format_number(1.0 / 3) == "0.333333333333");
}

TEST_CASE("unital command") {
  const auto f = load_problem(data("unital_triple.json"));
  const auto u = cli::unital(f, {});
  CHECK(u.exit_code == cli::kOk);
  CHECK(u.report["q0"].get<double>() == doctest::Approx(8.0 / 21).epsilon(1e-12));
  CHECK(u.report["q1"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(u.report["p0"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(u.report["upsilon00"][0].get<double>() == doctest::Approx(0.2));
  CHECK(u.report["upsilon01"][2].get<double>() == doctest::Approx(-2.0 / 15));
  CHECK(u.report["upsilon11_per_q"][2].get<double>() == doctest::Approx(-0.2));
  CHECK(u.report["cross_check"]["agree"].get<bool>());
  CHECK(csv_rows(u.csv).size() == 11u);

  const auto g = load_problem(data("identity_vs_x.json"));
  CHECK_THROWS_AS(cli::unital(g, {}), InputError);
}

TEST_CASE("certify command") {
  const auto f = load_problem(data("unital_triple.json"));
  const auto s = cli::solve(f, {});
  const auto c = cli::certify(f, s.report, {});
  CHECK(c.exit_code == cli::kOk);
  CHECK(c.report.status == "pass");

  Report scaled = s.report;
  for (auto& e : scaled.tester->elements) e *= 0.9;
  const auto bad = cli::certify(f, scaled, {});
  CHECK(bad.exit_code == cli::kNotOptimal);
  const auto failed = bad.report.extra["failed"];
  CHECK(std::find(failed.begin(), failed.end(), "primal feasibility") != failed.end());

  // Without a certificate the dual point comes from the tester.
  const auto g = load_problem(data("identity_vs_x.json"));
  Report bare = cli::solve(g, {}).report;
  bare.cert.reset();
  CHECK(cli::certify(g, bare, {}).exit_code == cli::kOk);
}

TEST_CASE("symmetrize command") {
  const auto f = load_problem(data("unital_triple.json"));
  const auto s = cli::solve(f, {});
  const auto t = cli::symmetrize(f, s.report, {});
  CHECK(t.exit_code == cli::kOk);
  CHECK(std::abs(t.report.value - s.report.value) <= 1e-9);
  CHECK(t.report.dual_value <= s.report.dual_value + 1e-9);
  CHECK(t.report.kkt->pass(1e-4));
  CHECK(cli::certify(f, t.report, {}).exit_code == cli::kOk);
}

TEST_CASE("minimax command") {
  const auto f = load_problem(data("unital_triple_minimax.json"));
  const auto m = cli::minimax(f, {});
  CHECK(m.exit_code == cli::kOk);
  CHECK(m.report.value == doctest::Approx(7.0 / 15).epsilon(1e-4));
  for (double v : m.report.mu) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-3));
  CHECK_THROWS_AS(cli::solve(f, {}), InputError);
}
