#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bnuq/catalog.hpp"
#include "commands.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = bnuq::cli::run_command(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "bnuq_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path.string();
}

const char* kUnitGaussian = R"({
  "version": "1",
  "vertices": [{"name": "X", "parents": [], "cpd": {"kind": "linear_gaussian", "intercept": 0.0, "coefficients": [], "sd": 1.0}}],
  "qoi": {"vertex": "X"}
})";

}  // namespace

TEST_CASE("index on a unit Gaussian is sqrt(2 eta)") {
  const auto model = write_file("unit.json", kUnitGaussian);
  const auto r = run({"index", "--model", model, "--eta", "0.5"});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["indices"][0]["i_plus"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["indices"][0]["i_minus"].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(j["qoi_mean"].get<double>() == 0.0);
}

TEST_CASE("identical runs are byte-identical") {
  const std::vector<std::string> args{"rank", "--model", "orr-tableB1", "--eta-uniform", "1", "--qoi", "xstar"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> mc{"index", "--model", "langmuir-illustrative", "--eta", "0.2",
                                    "--samples", "20000", "--seed", "5"};
  const auto a = run(mc);
  REQUIRE(a.status == 0);
  CHECK(a.out == run(mc).out);
}

TEST_CASE("ORR ranking shares follow the closed-form interval widths") {
  const auto r = run({"rank", "--model", "orr-tableB1", "--eta-uniform", "1", "--qoi", "xstar"});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  const bnuq::OrrParams p;
  double total = 0.0;
  for (const auto& name : bnuq::OrrParams::omega_names()) total += bnuq::orr_sensitivity_interval(p, name, 1.0).hi;
  REQUIRE(j["indices"].size() == 11);
  for (const auto& e : j["indices"]) {
    const double expected = bnuq::orr_sensitivity_interval(p, e["vertex"].get<std::string>(), 1.0).hi / total;
    CHECK(e["share"].get<double>() == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(j["indices"][0]["vertex"] == "d0");
}

TEST_CASE("a mean-zero KDE replacement leaves the other omegas unchanged") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, std::sqrt(0.0347));
  std::string csv = "residual\n";
  for (int i = 0; i < 500; ++i) csv += std::to_string(z(rng)) + "\n";
  const auto data = write_file("c1_residuals.csv", csv);
  const auto r = run({"correct-check", "--model", "orr-tableB1", "--eta-uniform", "0.5", "--replace", "c1=kde:" + data});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["corrected"] == "c1");
  CHECK(j["rule"] == "gaussian_mean_zero");
  std::vector<std::string> expected;
  for (const auto& n : bnuq::OrrParams::omega_names()) {
    if (n != "c1") expected.push_back(n);
  }
  std::vector<std::string> got = j["unchanged"].get<std::vector<std::string>>();
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  CHECK(got == expected);
  CHECK(j["recheck"].empty());
}

TEST_CASE("stress emits a CSV curve starting at zero") {
  const auto r = run({"stress", "--model", "markov-chain", "--eta-max", "1", "--points", "3", "--vertex", "X2"});
  REQUIRE(r.status == 0);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "eta,X2_i_plus,X2_i_minus");
  CHECK(first == "0,0,0");
}

TEST_CASE("fit writes a model that index can read") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  std::string csv = "X1,X2,X3,X4\n";
  for (int i = 0; i < 2000; ++i) {
    const double x1 = z(rng), x2 = 0.8 * x1 + 0.5 * z(rng), x3 = 0.8 * x2 + 0.5 * z(rng), x4 = 0.8 * x3 + 0.5 * z(rng);
    csv += std::to_string(x1) + "," + std::to_string(x2) + "," + std::to_string(x3) + "," + std::to_string(x4) + "\n";
  }
  const auto data = write_file("chain.csv", csv);
  const auto fitted = (scratch_dir() / "fitted.json").string();
  REQUIRE(run({"fit", "--model", "markov-chain", "--data", data, "--out", fitted}).status == 0);
  const auto r = run({"index", "--model", fitted, "--qoi", "X4", "--eta", "0.1"});
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["indices"][0]["i_plus"].get<double>() > 0.0);
}

TEST_CASE("catalog lists and emits presets") {
  const auto list = run({"catalog"});
  REQUIRE(list.status == 0);
  CHECK(json::parse(list.out)["presets"].size() == 3);
  const auto orr = run({"catalog", "--name", "orr-tableB1"});
  REQUIRE(orr.status == 0);
  CHECK(json::parse(orr.out)["vertices"].size() == 14);
}

TEST_CASE("errors are structured JSON on stderr") {
  const auto usage = run({"index", "--eta", "0.1"});
  CHECK(usage.status == 2);
  CHECK(json::parse(usage.err).contains("error"));

  const auto missing = run({"index", "--model", "/nonexistent.json", "--eta", "0.1"});
  CHECK(missing.status == 1);
  CHECK(json::parse(missing.err)["error"]["code"] == "IoError");

  const auto bad = write_file("bad.json", "{\"version\": \"1\", \"vertices\": [");
  const auto syntax = run({"index", "--model", bad, "--eta", "0.1"});
  CHECK(syntax.status == 1);
  const auto e = json::parse(syntax.err)["error"];
  CHECK(e["code"] == "SyntaxError");
  CHECK(e.contains("position"));

  CHECK(run({"frobnicate"}).status == 2);
}
