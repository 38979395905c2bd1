#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pvi/errors.hpp"
#include "pvi/json_io.hpp"
#include "pvi/kkt.hpp"
#include "support/fixtures.hpp"

using namespace pvi;
using njson = nlohmann::json;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

std::string problem_text(const testing::PairFixture& fx, const VectorXd& p) {
  return problem_to_json(VIProblem(fx.K, fx.P, p));
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << text;
}

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary named by PVI_BIN with a shell-quoted argument
// string; stdin is fed from a file when given.
CliRun run_cli(const std::string& args, const std::string& stdin_path = "") {
  const char* bin = std::getenv("PVI_BIN");
  REQUIRE(bin != nullptr);
  const std::string base = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string out_path = base + "/pvi_cli_out.txt";
  const std::string err_path = base + "/pvi_cli_err.txt";
  std::string cmd = std::string(bin) + " " + args + " > " + out_path + " 2> " +
                    err_path;
  if (!stdin_path.empty()) cmd += " < " + stdin_path;
  const int status = std::system(cmd.c_str());
  CliRun run;
  run.exit_code = WEXITSTATUS(status);
  run.out = read_file(out_path);
  run.err = read_file(err_path);
  return run;
}

std::string tmp_path(const std::string& name) {
  const std::string base = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  return base + "/" + name;
}

}  // namespace

TEST_CASE("problem files round trip") {
  const auto fx = testing::squared_gap_pair();
  SolveConfig cfg;
  cfg.seed = 99;
  cfg.multistart = 32;
  const std::string text =
      problem_to_json(VIProblem(fx.K, fx.P, vec2(-1, 2)), &cfg);
  const ProblemFile pf = load_problem_string(text);
  CHECK(pf.has_config);
  CHECK(pf.config.seed == 99);
  CHECK(pf.config.multistart == 32);
  CHECK((pf.problem.p - vec2(-1, 2)).norm() == 0.0);
  CHECK((pf.problem.P.coeffs() - fx.P.coeffs()).norm() == 0.0);
  CHECK((pf.problem.K.C() - fx.K.C()).norm() == 0.0);
  CHECK(pf.problem.K.num_eq() == 0);
}

TEST_CASE("strict schema rejections") {
  const auto fx = testing::squared_gap_pair();
  const std::string good = problem_text(fx, vec2(0, 0));

  SUBCASE("unknown keys are named") {
    njson j = njson::parse(good);
    j["extra"] = 1;
    CHECK_THROWS_WITH_AS(load_problem_string(j.dump()),
                         doctest::Contains("extra"), InputError);
    njson j2 = njson::parse(good);
    j2["P"]["surprise"] = true;
    CHECK_THROWS_AS(load_problem_string(j2.dump()), InputError);
  }

  SUBCASE("malformed json") {
    CHECK_THROWS_AS(load_problem_string("{ not json"), InputError);
  }

  SUBCASE("coefficient shape must match n and d") {
    njson j = njson::parse(good);
    j["P"]["coeffs"][0].push_back(1.0);
    CHECK_THROWS_AS(load_problem_string(j.dump()), InputError);
  }

  SUBCASE("p length must match") {
    njson j = njson::parse(good);
    j["p"].push_back(0.0);
    CHECK_THROWS_AS(load_problem_string(j.dump()), InputError);
  }

  SUBCASE("empty sets are refused") {
    njson j = njson::parse(good);
    j["K"]["C"] = {{1.0, 0.0}, {-1.0, 0.0}};
    j["K"]["b"] = {-2.0, 1.0};  // x1 <= -2 and x1 >= -1
    CHECK_THROWS_WITH_AS(load_problem_string(j.dump()),
                         doctest::Contains("empty"), InputError);
  }

  SUBCASE("config fields are validated") {
    njson j = njson::parse(good);
    j["config"] = {{"multistart", 0}};
    CHECK_THROWS_AS(load_problem_string(j.dump()), InputError);
    njson j2 = njson::parse(good);
    j2["config"] = {{"no_such_knob", 1}};
    CHECK_THROWS_AS(load_problem_string(j2.dump()), InputError);
  }
}

TEST_CASE("config hash tracks the configuration") {
  SolveConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 1;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.newton_tol = 2e-10;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("solution report structure") {
  const auto fx = testing::squared_gap_pair();
  SolveConfig cfg;
  const SolutionSet sol = solve(VIProblem(fx.K, fx.P, vec2(-1, 0)), cfg);
  const njson j = njson::parse(solution_to_json(sol, cfg));
  CHECK(j["status"] == "complete");
  REQUIRE(j["points"].size() == 1);
  CHECK(j["points"][0][0].get<double>() == doctest::Approx(1.0));
  REQUIRE(j["point_details"].size() == 1);
  CHECK(j["point_details"][0]["alpha"].size() == 1);
  CHECK(j.contains("config"));
  CHECK(j.contains("config_hash"));
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("cli solve on a file and on stdin") {
  const auto fx = testing::cube_root_pair();
  const std::string in = tmp_path("cube_root_problem.json");
  write_file(in, problem_text(fx, vec2(-8, -27)));

  const CliRun file_run = run_cli("--in " + in + " solve");
  REQUIRE(file_run.exit_code == 0);
  const njson j = njson::parse(file_run.out);
  CHECK(j["status"] == "complete");
  CHECK(j["points"][0][0].get<double>() == doctest::Approx(2.0));
  CHECK(j["points"][0][1].get<double>() == doctest::Approx(3.0));

  const CliRun stdin_run = run_cli("--in - solve", in);
  CHECK(stdin_run.exit_code == 0);
  CHECK(stdin_run.out == file_run.out);  // byte identical

  // Reruns are reproducible to the byte.
  const CliRun again = run_cli("--in " + in + " solve");
  CHECK(again.out == file_run.out);
}

TEST_CASE("cli solve writes --out and returns 2 when inconclusive") {
  const auto fx = testing::squared_gap_pair();
  const std::string in = tmp_path("squared_gap_problem.json");
  const std::string out = tmp_path("squared_gap_solution.json");
  write_file(in, problem_text(fx, vec2(-1, -1)));

  const CliRun run = run_cli("--in " + in + " --out " + out + " solve");
  CHECK(run.exit_code == 2);
  const njson j = njson::parse(read_file(out));
  CHECK(j["status"] == "inconclusive");
  CHECK(j["components"].size() == 2);

  // Solutions reported by the tool verify against the library directly.
  const ProblemFile pf = load_problem_string(read_file(in));
  for (const auto& pt : j["points"]) {
    VectorXd x(2);
    x << pt[0].get<double>(), pt[1].get<double>();
    CHECK(verify_solution(pf.problem, x, 1e-7));
  }
}

TEST_CASE("cli error paths") {
  CHECK(run_cli("--in " + tmp_path("no_such_file.json") + " solve").exit_code ==
        1);

  const std::string bad = tmp_path("bad_problem.json");
  write_file(bad, "{ this is not json");
  const CliRun malformed = run_cli("--in " + bad + " solve");
  CHECK(malformed.exit_code == 1);
  CHECK(malformed.err.find("error:") != std::string::npos);

  // Unknown flags are caught by the option parser.
  CHECK(run_cli("solve --frobnicate").exit_code != 0);
}

TEST_CASE("cli warns when the effective degree drops") {
  // A degree-3 container holding a linear map: recession analyses use the
  // effective leading term, and the tool says so on stderr.
  MonomialBasis basis(2, 3);
  MatrixXd A = MatrixXd::Zero(2, basis.size());
  A(0, 1) = 1.0;
  A(1, 2) = 1.0;
  const PolynomialMap P(basis, A);
  const std::string in = tmp_path("degree_drop_problem.json");
  write_file(in, problem_to_json(
                     VIProblem(PolyhedralSet::orthant(2), P, vec2(1, 1))));
  const CliRun run = run_cli("--in " + in + " solve");
  CHECK(run.exit_code == 0);
  CHECK(run.err.find("effective degree") != std::string::npos);
}

TEST_CASE("cli analysis subcommands emit their reports") {
  const auto gap = testing::squared_gap_pair();
  const auto cube = testing::cube_root_pair();
  const std::string gap_in = tmp_path("gap_problem.json");
  const std::string cube_in = tmp_path("cube_problem.json");
  write_file(gap_in, problem_text(gap, vec2(-1, -1)));
  write_file(cube_in, problem_text(cube, vec2(0, 0)));

  SUBCASE("r0") {
    const CliRun r = run_cli("--in " + gap_in + " r0");
    CHECK(r.exit_code == 0);
    const njson j = njson::parse(r.out);
    CHECK(j["r0"] == false);
    CHECK(j["status"] == "nontrivial");
    CHECK(j["witnesses"].size() >= 1);

    const CliRun r2 = run_cli("--in " + cube_in + " r0");
    CHECK(njson::parse(r2.out)["r0"] == true);
  }

  SUBCASE("copositive") {
    const CliRun r = run_cli("--in " + gap_in + " copositive");
    CHECK(r.exit_code == 0);
    const njson j = njson::parse(r.out);
    CHECK(j["verdict"] == "copositive");
  }

  SUBCASE("certify") {
    const CliRun refused = run_cli("--in " + gap_in + " certify");
    CHECK(refused.exit_code == 0);
    CHECK(njson::parse(refused.out)["certified"] == false);

    const std::string pos_in = tmp_path("gap_positive_problem.json");
    write_file(pos_in, problem_text(gap, vec2(1, 2)));
    const CliRun granted = run_cli("--in " + pos_in + " certify");
    CHECK(njson::parse(granted.out)["certified"] == true);
    CHECK(njson::parse(granted.out)["premises"].size() == 3);
  }

  SUBCASE("sweep") {
    const std::string csv = tmp_path("gap_sweep.csv");
    const CliRun r = run_cli("--in " + gap_in + " --out " + csv +
                             " sweep --grid \" -1:1:3\"");
    CHECK(r.exit_code == 0);
    std::istringstream is(read_file(csv));
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "p0,p1,status,label,points,components,max_norm,error_kind");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 9);
  }

  SUBCASE("hoelder") {
    const CliRun r = run_cli("--in " + cube_in +
                             " hoelder --dirs 4 --radii 1e-1,1e-2,1e-3");
    CHECK(r.exit_code == 0);
    const njson j = njson::parse(r.out);
    CHECK(j["premises_hold"] == true);
    const double c = j["fit"]["exponent"].get<double>();
    CHECK(c > 0.25);
    CHECK(c < 0.45);
  }

  SUBCASE("generic") {
    const std::string csv = tmp_path("generic_trials.csv");
    const CliRun r = run_cli("generic --n 2 --d 2 --trials 4 --mode finite "
                             "--csv " + csv);
    CHECK(r.exit_code == 0);
    const njson j = njson::parse(r.out);
    CHECK(j["trials"] == 4);
    std::istringstream is(read_file(csv));
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "trial,sub_seed,pass,retried");
  }
}
