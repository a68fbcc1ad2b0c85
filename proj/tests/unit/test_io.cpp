#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "json.hpp"
#include "mzdual/cli.hpp"
#include "mzdual/errors.hpp"
#include "mzdual/io.hpp"
#include "mzdual/matrix_game.hpp"

using namespace mzdual;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = MZDUAL_DATA_DIR;

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("mzdual_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool any_error_starts_with(const std::vector<std::string>& errors, const std::string& prefix) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) { return e.rfind(prefix, 0) == 0; });
}

cli::RunOutcome run_cli(const std::string& command, const fs::path& spec, const fs::path& out,
                        bool verify = false) {
  cli::RunOptions o;
  o.command = command;
  o.spec_path = spec;
  o.out_dir = out;
  o.verify = verify;
  return cli::run(o);
}

}  // namespace

TEST_CASE("minimal spec fills every default") {
  const io::ParseResult r = io::parse_spec(R"({"payoffs": {"0|0": [[3]]}})");
  REQUIRE(r.ok());
  const io::GameSpecFile& s = *r.spec;
  CHECK(s.types_k.size() == 1);
  CHECK(s.types_l.size() == 1);
  CHECK(s.actions_i == std::vector<std::string>{"0"});
  CHECK(s.actions_j == std::vector<std::string>{"0"});
  CHECK(s.belief == std::vector<double>{1.0});
  CHECK_FALSE(s.evaluation.has_value());
  CHECK_FALSE(s.differential.has_value());
  CHECK(s.config.grid_m == 50);
  CHECK(s.config.dt == doctest::Approx(0.02));
  CHECK(s.config.seed == 1);
  CHECK(matrix_game_value(s.family().payoff(0, 0)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("belief off the simplex is reported at its path") {
  const io::ParseResult r = io::parse_spec(R"({
    "types_k": ["a"], "types_l": ["x", "y"],
    "payoffs": {"a|x": [[1]], "a|y": [[0]]},
    "belief": [0.5, 0.6]})");
  CHECK_FALSE(r.ok());
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0] == "belief: entries sum to 1.1, expected 1 within 1e-9");
}

TEST_CASE("every validation error is collected") {
  const io::ParseResult r = io::parse_spec(R"({
    "types_k": ["1", "2"], "types_l": ["*"],
    "payoffs": {"1|*": [[1, 0], [0, 0]], "3|*": [[0]]},
    "belief": [-0.5, 1.5],
    "evaluation": [0.5, 0.25],
    "config": {"grid_m": 0, "colour": "red"}})");
  CHECK_FALSE(r.ok());
  CHECK(any_error_starts_with(r.errors, "payoffs.2|*: missing matrix"));
  CHECK(any_error_starts_with(r.errors, "payoffs.3|*: unknown type pair"));
  CHECK(any_error_starts_with(r.errors, "belief[0]"));
  CHECK(any_error_starts_with(r.errors, "evaluation: entries sum to 0.75"));
  CHECK(any_error_starts_with(r.errors, "config.grid_m"));
  CHECK(any_error_starts_with(r.errors, "config.colour: unknown key"));
  CHECK(r.errors.size() >= 6);
}

TEST_CASE("shape mismatches and malformed syntax") {
  io::ParseResult r = io::parse_spec(R"({
    "types_k": ["1", "2"],
    "payoffs": {"1|0": [[1, 0], [0, 0]], "2|0": [[0, 0, 1], [0, 1, 0]]}})");
  CHECK(any_error_starts_with(r.errors, "payoffs.2|0: expected a 2x2"));

  r = io::parse_spec(R"({"payoffs": {"0|0": [[1, 2], [3]]}})");
  CHECK(any_error_starts_with(r.errors, "payoffs.0|0[1]: rows must all have 2 entries"));

  r = io::parse_spec(R"({"payoffs": {"0|0": [[1, 2]]}, )");
  REQUIRE(r.errors.size() == 1);
  CHECK(any_error_starts_with(r.errors, "$: malformed JSON"));

  CHECK_THROWS_AS(io::parse_spec_or_throw("[]"), ValidationError);
}

TEST_CASE("flat matrices need declared actions") {
  io::ParseResult r = io::parse_spec(R"({
    "actions_i": ["T", "B"], "actions_j": ["L", "M", "R"],
    "payoffs": {"0|0": [1, 2, 3, 4, 5, 6]}})");
  REQUIRE(r.ok());
  CHECK(r.spec->payoffs[0](1, 0) == 4.0);
  CHECK(r.spec->payoffs[0](0, 2) == 3.0);

  r = io::parse_spec(R"({"payoffs": {"0|0": [1, 2]}})");
  CHECK(any_error_starts_with(r.errors, "payoffs.0|0: a flat matrix needs"));
}

TEST_CASE("Aumann-Maschler data file") {
  const io::GameSpecFile s = io::parse_spec_or_throw(io::read_file(kData / "aumann_maschler.json"));
  CHECK(s.types_k == std::vector<std::string>{"1", "2"});
  CHECK(s.types_l == std::vector<std::string>{"*"});
  CHECK(s.actions_i == std::vector<std::string>{"T", "B"});
  CHECK(s.actions_j == std::vector<std::string>{"L", "R"});
  REQUIRE(s.payoffs.size() == 2);
  const double g1[2][2] = {{1, 0}, {0, 0}}, g2[2][2] = {{0, 0}, {0, 1}};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(s.payoffs[0](i, j) == g1[i][j]);
      CHECK(s.payoffs[1](i, j) == g2[i][j]);
    }
  CHECK(s.belief == std::vector<double>{0.5, 0.5});
  CHECK(s.belief_labels() == std::vector<std::string>{"pi[1|*]", "pi[2|*]"});
  REQUIRE(s.differential.has_value());
  CHECK(s.differential->dynamics == "payoff-accumulator");
  CHECK(s.config.grid_m == 50);
  CHECK(s.config.dt == 0.02);

  const MayerSpec game = io::build_game(s);
  CHECK(game.state_dim == 2);
  CHECK(game.num_k == 2);
  CHECK(game.num_l == 1);
}

TEST_CASE("shortest round-trip formatting and CSV parsing") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(-0.0) == "-0");
  CHECK(io::format_double(1e-300) == "1e-300");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(io::format_double(third)) == third);

  io::CsvTable t{{"a", "b"}, {{0.1, third}, {-2.5, 1e20}}};
  const io::CsvTable back = io::parse_csv(t.str());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  CHECK_THROWS_AS(back.column("c"), ValidationError);
  CHECK_THROWS_AS(io::parse_csv("a,b\n1\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_csv("a\nx\n"), ValidationError);

  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("mz on the Aumann-Maschler file") {
  const fs::path out = scratch("mz");
  const cli::RunOutcome r = run_cli("mz", kData / "aumann_maschler.json", out, true);
  CHECK(r.exit_code == cli::kExitOk);
  const json rep = json::parse(r.report);
  CHECK(rep["status"] == "ok");
  CHECK(rep["inputs"]["digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  for (const auto& c : rep["verification"]) CHECK(c["passed"].get<bool>());

  const io::CsvTable w = io::read_csv(out / "w.csv");
  REQUIRE(w.rows.size() == 51);
  const std::size_t p1 = w.column("pi[1|*]"), wc = w.column("W");
  double worst = 0.0;
  for (const auto& row : w.rows) worst = std::max(worst, std::abs(row[wc] - row[p1] * (1 - row[p1])));
  CHECK(worst <= 1e-8);
  CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("CSV output is byte-identical across runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const std::string cmd : {"mz", "hj"}) {
    REQUIRE(run_cli(cmd, kData / "aumann_maschler.json", a).exit_code == 0);
    REQUIRE(run_cli(cmd, kData / "aumann_maschler.json", b).exit_code == 0);
  }
  for (const char* f : {"w.csv", "hj.csv", "hj_grid.csv"})
    CHECK(io::read_file(a / f) == io::read_file(b / f));
}

TEST_CASE("xcheck reports the MZ-HJ gap") {
  const fs::path out = scratch("xcheck");
  const cli::RunOutcome r = run_cli("xcheck", kData / "aumann_maschler.json", out);
  CHECK(r.exit_code == cli::kExitOk);
  const json rep = json::parse(r.report);
  CHECK(rep["outputs"]["mz_hj_gap"].get<double>() <= 5e-2);
  CHECK(rep["outputs"]["vn"].size() == 4);
  CHECK(fs::exists(out / "xcheck.csv"));
}

TEST_CASE("hj with a CFL-violating step exits with a hypothesis error") {
  const fs::path out = scratch("cfl");
  cli::RunOptions o;
  o.command = "hj";
  o.spec_path = kData / "aumann_maschler.json";
  o.out_dir = out;
  o.dt = 0.5;
  const cli::RunOutcome r = cli::run(o);
  CHECK(r.exit_code == cli::kExitHypothesis);
  const json rep = json::parse(r.report);
  CHECK(rep["status"] == "error");
  CHECK(rep["error"]["kind"] == "CflViolation");
  CHECK(rep["error"]["exit_code"] == cli::kExitHypothesis);
  CHECK(rep["command"] == "hj");
}

TEST_CASE("error paths exit nonzero with a structured block") {
  const fs::path out = scratch("errors");
  cli::RunOutcome r = run_cli("mz", out / "missing.json", out);
  CHECK(r.exit_code == cli::kExitValidation);
  CHECK(json::parse(r.report).contains("error"));

  r = run_cli("frobnicate", kData / "aumann_maschler.json", out);
  CHECK(r.exit_code == cli::kExitValidation);

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"payoffs": {"0|0": [[1]]}, "belief": [0.5, 0.6]})";
  r = run_cli("u", bad, out);
  CHECK(r.exit_code == cli::kExitValidation);
  const json rep = json::parse(r.report);
  REQUIRE(rep["error"]["details"].size() == 1);
  CHECK(rep["error"]["details"][0].get<std::string>().rfind("belief:", 0) == 0);

  r = run_cli("verify", kData / "aumann_maschler.json", scratch("empty"));
  CHECK(r.exit_code == cli::kExitValidation);
}

TEST_CASE("verify re-checks stored outputs and catches corruption") {
  const fs::path out = scratch("verify");
  const fs::path spec = kData / "aumann_maschler.json";
  REQUIRE(run_cli("mz", spec, out).exit_code == 0);
  REQUIRE(run_cli("hj", spec, out).exit_code == 0);
  cli::RunOutcome r = run_cli("verify", spec, out);
  CHECK(r.exit_code == cli::kExitOk);
  CHECK(json::parse(r.report)["verification"].size() == 11);

  io::CsvTable w = io::read_csv(out / "w.csv");
  w.rows[10][w.column("W")] += 0.05;
  w.write(out / "w.csv");
  r = run_cli("verify", spec, out);
  CHECK(r.exit_code == cli::kExitChecksFailed);
  const json rep = json::parse(r.report);
  CHECK(rep["status"] == "checks_failed");
  bool named = false;
  for (const auto& c : rep["verification"])
    if (!c["passed"].get<bool>() && !c["witness"].get<std::string>().empty()) named = true;
  CHECK(named);
}
