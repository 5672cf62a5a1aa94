#include "doctest.h"

#include "nonloc/commands.hpp"
#include "nonloc/parallel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nonloc;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nonloc_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kHomogeneous = R"({"kernel": {"family": "gaussian", "sigma": 1.0}, "N": 16,
                               "effective": {"agreement_tol": 1e-8}})";
const char* kStandard = R"({"kernel": {"family": "gaussian", "sigma": 0.3},
                            "modulation": {"cos_products": [{"amplitude": 0.5}]}})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.kernel.family == "gaussian");
  CHECK(c.truncation() == 32);
  CHECK(c.eps_list().size() == 7);
  CHECK(c.eps_list().front() == 0.125);
  CHECK(c.eps_list().back() == std::ldexp(1.0, -9));
  const RunConfig c2 = parse_config(R"({"kernel": {"dimension": 2}})");
  CHECK(c2.truncation() == 8);
  CHECK(c2.eps_list().size() == 5);
  CHECK(c2.make_kernel().dimension() == 2);
}

TEST_CASE("modulation from cosine products and terms") {
  const RunConfig c = parse_config(kStandard);
  const Modulation mu = c.make_modulation();
  const Modulation ref = Modulation::cosine_product(1, 0.5);
  const Vec x = Vec::Constant(1, 0.1), y = Vec::Constant(1, 0.35);
  CHECK(mu.evaluate(x, y) == Approx(ref.evaluate(x, y)).epsilon(1e-15));
  const RunConfig t = parse_config(R"({"modulation": {"mean": 2.0, "terms": [
      {"p": [1], "q": [-1], "re": 0.25}, {"p": [-1], "q": [1], "re": 0.25}]}})");
  CHECK(t.make_modulation().evaluate(x, y) == Approx(2.0 + 0.5 * std::cos(2 * kPi * (0.1 - 0.35))).epsilon(1e-14));
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_AS(parse_config(R"({"kernal": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"sigma": "wide"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"family": "cauchy"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"N": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"eps": [0.1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"eps": [0.1, 0.1, 0.05]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"modulation": {"cos_products": [{"amplitude": -1.5}]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"N": 2, "modulation": {"terms": [
      {"p": [3], "q": [-3], "re": 0.1}, {"p": [-3], "q": [3], "re": 0.1}]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"family": "ball", "dimension": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"effective": {"methods": ["corrector", "magic"]}})"), ConfigError);
}

TEST_CASE("effective command on the homogeneous closed form") {
  const fs::path out = scratch("eff");
  const CommandResult r = cmd_effective(parse_config(kHomogeneous), out);
  CHECK(r.exit_code == kExitPass);
  const auto j = nlohmann::json::parse(slurp(out / "effective.json"));
  CHECK(j["schema_version"] == kSchemaVersion);
  for (const char* m : {"corrector", "hessian", "contour"})
    CHECK(j["methods"][m]["g0"][0][0].get<double>() == Approx(0.5).epsilon(1e-8));
  CHECK(j["agreement"]["pass"] == true);
  CHECK(j["correctors"][0]["norm"].get<double>() <= 1e-10);
}

TEST_CASE("effective report is deterministic across thread counts") {
  const RunConfig c = parse_config(kStandard);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  set_thread_count(1);
  cmd_effective(c, a);
  set_thread_count(3);
  cmd_effective(c, b);
  set_thread_count(1);
  CHECK(slurp(a / "effective.json") == slurp(b / "effective.json"));
}

TEST_CASE("constants command") {
  const fs::path out = scratch("const");
  const CommandResult r = cmd_constants(parse_config(R"({"kernel": {"sigma": 1.0}, "N": 8})"), out);
  CHECK(r.exit_code == kExitPass);
  const auto j = nlohmann::json::parse(slurp(out / "constants.json"));
  CHECK(j["chain"]["C_a"].get<double>() == Approx(0.03617).epsilon(1e-3));
  CHECK(j["chain"].contains("empirical"));
  CHECK(j["sandwich_bounds"]["pass"] == true);
  const CommandResult ball = cmd_constants(parse_config(R"({"kernel": {"family": "ball", "radius": 1.0}, "N": 8})"), out);
  CHECK(ball.report["sandwich_bounds"].is_object());
  const CommandResult none = cmd_constants(
      parse_config(R"({"kernel": {"family": "sampled", "samples": [1.0, 0.5, 0.0], "l2_data": false}, "N": 8})"), out);
  CHECK(none.exit_code == kExitPass);
  CHECK(none.report["sandwich_bounds"] == "unavailable");
}

TEST_CASE("dispersion command") {
  const fs::path out = scratch("disp");
  const RunConfig c = parse_config(R"({"kernel": {"sigma": 1.0}, "N": 8, "dispersion": {"points": 65}})");
  const CommandResult r = cmd_dispersion(c, out);
  CHECK(r.exit_code == kExitPass);
  std::ifstream in(out / "dispersion.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "xi_1,lambda1,lambda2,q,lambda1_minus_q,lambda1_lower_bound");
  int rows = 0;
  while (std::getline(in, line)) {
    double xi, l1, l2, q, diff, lb;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &xi, &l1, &l2, &q, &diff, &lb) == 6);
    CHECK(l1 == Approx(1.0 - std::exp(-0.5 * xi * xi)).epsilon(1e-12));
    CHECK(l1 >= lb);
    ++rows;
  }
  CHECK(rows == 65);
  CHECK(r.report["local_order"]["slope"].get<double>() >= 2.7);
}

TEST_CASE("verify command on a small configuration") {
  const fs::path out = scratch("verify");
  const RunConfig c = parse_config(R"({"kernel": {"sigma": 0.3}, "N": 12,
      "modulation": {"cos_products": [{"amplitude": 0.5}]},
      "sweep": {"eps": [0.125, 0.0625, 0.03125], "grid_per_dim": 33, "slope_min": 0.5, "slope_max": 2.0},
      "projector_bounds": {"samples": 5},
      "oracle": {"grid": 128, "form_grid": 32}})");
  const CommandResult r = cmd_verify(c, out);
  CHECK(r.exit_code == kExitPass);
  CHECK(fs::exists(out / "verify.json"));
  CHECK(fs::exists(out / "sweep.csv"));
  CHECK(r.report["checks"].size() == 7);
  // An impossible slope window turns into a failed check with exit code 1.
  const RunConfig bad = parse_config(R"({"kernel": {"sigma": 0.3}, "N": 12,
      "modulation": {"cos_products": [{"amplitude": 0.5}]},
      "sweep": {"eps": [0.125, 0.0625, 0.03125], "grid_per_dim": 33, "slope_min": 3.0, "slope_max": 4.0},
      "projector_bounds": {"samples": 5}, "oracle": {"enabled": false}})");
  const CommandResult rb = cmd_verify(bad, out);
  CHECK(rb.exit_code == kExitCheckFailed);
  CHECK(rb.report["checks"]["sweep_slope"] == false);
}

}  // TEST_SUITE
