#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "expanderlab/profile.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the tool with the given arguments, capturing stdout; stderr is
// dropped so expected-failure cases don't clutter the test log.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(EXPANDER_LAB_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("--help").out.find("laboratory") != std::string::npos);
  CHECK(run_cli("examples --bogus 3").code == 2);
  CHECK(run_cli("").code != 0);  // a subcommand is required
}

TEST_CASE("examples table") {
  const RunResult res = run_cli("examples");
  CHECK(res.code == 0);
  CHECK(res.out.rfind("kind,n,k,r,lambda,H,normA2,residual\n", 0) == 0);
  CHECK(res.out.find("sphere") != std::string::npos);
  CHECK(res.out.find("cylinder") != std::string::npos);
  CHECK(res.out.find("hyperplane") != std::string::npos);

  const RunResult js = run_cli("examples --kind sphere --radii 2 --format json");
  CHECK(js.code == 0);
  const json rows = json::parse(js.out);
  REQUIRE(rows.is_array());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["lambda"].get<double>() == doctest::Approx(2.0));
  CHECK(rows[0]["H"].get<double>() == doctest::Approx(1.0));

  // a negative radius is rejected by the sphere constructor
  CHECK(run_cli("examples --radii -1").code == 2);
}

TEST_CASE("identity residuals for canonical surfaces") {
  const RunResult res = run_cli("residuals --surface sphere --n 2 --r 2 --h 0.05");
  CHECK(res.code == 0);
  const json arr = json::parse(res.out);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 10);
  for (const auto& rep : arr) {
    CHECK(rep.contains("identity"));
    CHECK(rep.contains("max_abs"));
    CHECK(rep["max_abs"].get<double>() <= 1e-10);
    CHECK(rep["lambda"].get<double>() == doctest::Approx(2.0));
  }
  CHECK(arr[0]["identity"].get<std::string>() == "drift_H");

  // overriding lambda breaks the expander equation and trips the gate
  CHECK(run_cli("residuals --surface sphere --n 2 --r 2 --h 0.05 --lambda 99").code == 2);
  CHECK(run_cli("residuals --surface missing_file.csv --lambda 3").code == 2);
}

TEST_CASE("identity residuals for a saved profile path") {
  expanderlab::IntegrateOptions opts;
  // stop before the tight curl near s = 2.4, where h = 0.03 differences
  // are not yet in their asymptotic regime
  opts.s_max = 2.5;
  const expanderlab::ProfilePath path =
      expanderlab::integrate_profile(-1.5, expanderlab::ExpanderSpec{2, 3.0}, opts);
  const std::string csv_path = "cli_residuals_path.csv";
  {
    std::ofstream f(csv_path);
    f << expanderlab::to_csv(path);
  }
  const RunResult res =
      run_cli("residuals --surface " + csv_path + " --lambda 3 --n 2 --h 0.03");
  CHECK(res.code == 0);
  const json arr = json::parse(res.out);
  REQUIRE(arr.size() == 10);
  for (const auto& rep : arr) {
    CHECK(rep["order"].get<double>() >= 1.8);
    CHECK(rep["h"].get<double>() > 0);
  }
  // without --lambda the CSV route cannot build the surface
  CHECK(run_cli("residuals --surface " + csv_path + " --n 2").code == 2);
  std::remove(csv_path.c_str());
}

TEST_CASE("shooting for closed profiles") {
  const RunResult res =
      run_cli("shoot --lambda 3 --n 2 --u0-range -8,-0.1 --samples 64");
  CHECK(res.code == 0);
  const json j = json::parse(res.out);
  CHECK(j["lambda"].get<double>() == doctest::Approx(3.0));
  CHECK(j["n"].get<int>() == 2);
  REQUIRE(j["samples"].is_array());  // (u0, signed miss) scan table
  CHECK(j["samples"].size() == 64);
  CHECK(j["samples"][0].size() == 2);
  REQUIRE(j["roots"].size() == 2);
  const double big = j["roots"][0]["radius"].get<double>();
  const double small = j["roots"][1]["radius"].get<double>();
  CHECK(big == doctest::Approx(3 + std::sqrt(5.0)).epsilon(1e-5));
  CHECK(small == doctest::Approx(3 - std::sqrt(5.0)).epsilon(1e-5));

  const std::string saved = "cli_shoot_saved.csv";
  const RunResult sv = run_cli("shoot --lambda 3 --n 2 --s-max 20 --save-profile " + saved);
  CHECK(sv.code == 0);
  const expanderlab::ProfilePath reloaded =
      expanderlab::path_from_csv(slurp(saved), expanderlab::ExpanderSpec{2, 3.0});
  CHECK(reloaded.states.size() > 100);
  CHECK(reloaded.states.front().v == doctest::Approx(0.0));
  std::remove(saved.c_str());
}

TEST_CASE("condition checks and exit codes") {
  const RunResult ok = run_cli("check --condition pinching --surface sphere --n 2 --r 2");
  CHECK(ok.code == 0);
  const json jok = json::parse(ok.out);
  CHECK(jok["holds"].get<bool>());
  CHECK(jok["condition"].get<std::string>() == "pinching");

  const RunResult bad =
      run_cli("check --condition sphere-window --surface cylinder --n 2 --k 1 --r 1");
  CHECK(bad.code == 1);
  const json jbad = json::parse(bad.out);
  CHECK_FALSE(jbad["holds"].get<bool>());
  CHECK(jbad["worst_value"].get<double>() == doctest::Approx(-2.0));

  const RunResult eig = run_cli("check --condition eigen-identity --trials 500");
  CHECK(eig.code == 0);
  CHECK(json::parse(eig.out)["n_points"].get<long>() == 500);

  const RunResult drift =
      run_cli("check --condition cylinder-drift --surface cylinder --n 2 --k 1 --r 1 --alpha 1");
  CHECK(drift.code == 0);

  // gap check demands a closed surface; the cylinder is not
  CHECK(run_cli("check --condition gap --surface cylinder --n 2 --k 1 --r 1").code == 2);
  CHECK(run_cli("check --condition nonsense --surface sphere").code == 2);
}

TEST_CASE("weighted areas and growth series") {
  const RunResult flat = run_cli("area --surface hyperplane --n 2 --d 0 --alpha 1 --R 20");
  CHECK(flat.code == 0);
  CHECK(std::abs(std::stod(flat.out) - 4 * std::acos(-1.0)) <= 1e-7);

  std::string radii = "5";
  for (int r = 6; r <= 20; ++r) radii += "," + std::to_string(r);
  const std::string series_csv = "cli_area_series.csv";
  const RunResult series =
      run_cli("area --surface cylinder --n 2 --k 1 --r 1 --alpha 1 --series --radii " +
              radii + " --out " + series_csv);
  CHECK(series.code == 0);
  const json fit = json::parse(series.out);
  CHECK(fit.contains("C"));
  CHECK(fit.contains("slope"));
  CHECK(fit["alpha"].get<double>() == doctest::Approx(1.0));
  CHECK(fit["slope"].get<double>() < 0.05);
  CHECK(slurp(series_csv).rfind("r,area\n", 0) == 0);
  std::remove(series_csv.c_str());

  const RunResult hint =
      run_cli("area --surface cylinder --n 2 --k 1 --r 1 --alpha 1 --delta 1 --R 8");
  CHECK(hint.code == 0);
  const json jh = json::parse(hint.out);
  CHECK(jh["value"].get<double>() > 0);
  CHECK(jh["partials"].size() == 8);
  CHECK(jh["last_ratio"].get<double>() < 0.2);

  CHECK(run_cli("area --surface nonsense --alpha 1 --R 5").code == 2);
}
