#include <doctest.h>

#include <string>

#include "bnuq/catalog.hpp"
#include "bnuq/error.hpp"
#include "bnuq/model_io.hpp"

using namespace bnuq;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::InvalidData;
}

const char* kUnitGaussian = R"({
  "version": "1",
  "vertices": [{"name": "X", "parents": [], "cpd": {"kind": "linear_gaussian", "intercept": 0.0, "coefficients": [], "sd": 1.0}}],
  "qoi": {"vertex": "X"}
})";

}  // namespace

TEST_CASE("a minimal model round-trips byte-identically") {
  const auto doc = parse_model(kUnitGaussian);
  CHECK(doc.model.size() == 1);
  REQUIRE(doc.qoi);
  const auto once = serialize_model(doc);
  const auto twice = serialize_model(parse_model(once));
  CHECK(once == twice);
}

TEST_CASE("every preset round-trips") {
  for (const auto& name : preset_names()) {
    const auto net = preset(name);
    ModelDocument doc{net.model, net.qois.front().second, {}, {}};
    const auto text = serialize_model(doc);
    const auto back = parse_model(text);
    CHECK(back.model.cpds() == net.model.cpds());
    CHECK(back.model.graph().parents(back.model.size() - 1) == net.model.graph().parents(net.model.size() - 1));
    CHECK(serialize_model(back) == text);
  }
}

TEST_CASE("the ORR preset carries the published parameters") {
  const auto net = preset("orr-tableB1");
  CHECK(net.model.size() == 14);
  const OrrParams p;
  const auto& y1 = std::get<LinearGaussianCPD>(net.model.cpd(12));
  CHECK(y1.intercept == 0.0595);
  CHECK(y1.coefficients.front() == 0.5111);
  CHECK(std::get<LinearGaussianCPD>(net.model.cpd(13)).intercept == 1.8231);
  const auto& s2 = std::get<LinearGaussianCPD>(net.model.cpd(9));
  CHECK(s2.noise_sd * s2.noise_sd == doctest::Approx(0.0054).epsilon(1e-14));
  CHECK(s2.intercept == -0.1209);
}

TEST_CASE("all CPD kinds parse") {
  const auto doc = parse_model(R"json({
    "version": "1",
    "vertices": [
      {"name": "g", "parents": [], "cpd": {"kind": "gamma", "shape": 2.0, "scale": 0.5}},
      {"name": "h", "parents": ["g"], "cpd": {"kind": "histogram", "coefficients": [1.0], "edges": [-1, 0, 1], "counts": [1, 3]}},
      {"name": "k", "parents": [], "cpd": {"kind": "kde", "points": [0.0, 1.0], "bandwidth": 0.3}},
      {"name": "p", "parents": [], "cpd": {"kind": "point_mass", "points": [-1, 1], "probs": [0.5, 0.5]}},
      {"name": "d", "parents": [], "cpd": {"kind": "discrete", "cardinality": 2, "table": [[0.3, 0.7]]}},
      {"name": "e", "parents": ["d"], "cpd": {"kind": "discrete", "cardinality": 2, "table": [[0.9, 0.1], [0.2, 0.8]]}},
      {"name": "z", "parents": ["h", "k"], "cpd": {"kind": "deterministic", "expression": "h*k + exp(-k)"}}
    ],
    "qoi": {"expression": "z + p"},
    "budgets": {"g": 0.1, "h": {"eta": 0.2}, "k": {"data": "r.csv"}},
    "mc": {"samples": 1000, "seed": 7}
  })json");
  CHECK(doc.model.size() == 7);
  CHECK(cpd_kind(doc.model.cpd(1)) == "histogram");
  CHECK(doc.budgets.at("g").eta == 0.1);
  CHECK(doc.budgets.at("k").data_file == "r.csv");
  CHECK(doc.mc.seed == 7u);
  CHECK_FALSE(doc.mc.outer);
  CHECK(serialize_model(parse_model(serialize_model(doc))) == serialize_model(doc));
}

TEST_CASE("parse errors carry a code and a location") {
  try {
    parse_model("{\"version\": \"1\", \"vertices\": [");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.position().has_value());
  }
  CHECK(code_of(R"({"version": "1", "vertices": [{"name": "a", "parents": ["b"], "cpd": {"kind": "linear_gaussian", "sd": 1}}]})") ==
        ErrorCode::UnresolvedParent);
  CHECK(code_of(R"({"version": "1", "vertices": [{"name": "a", "parents": [], "cpd": {"kind": "weibull"}}]})") ==
        ErrorCode::UnknownCpdKind);
  CHECK(code_of(R"({"version": "1", "vertices": [
      {"name": "a", "parents": ["b"], "cpd": {"kind": "linear_gaussian", "coefficients": [1], "sd": 1}},
      {"name": "b", "parents": ["a"], "cpd": {"kind": "linear_gaussian", "coefficients": [1], "sd": 1}}]})") ==
        ErrorCode::CycleDetected);
  CHECK(code_of(R"({"version": "2", "vertices": []})") == ErrorCode::InvalidData);
}

TEST_CASE("unresolved parents are named") {
  try {
    parse_model(R"({"version": "1", "vertices": [{"name": "a", "parents": ["ghost"], "cpd": {"kind": "linear_gaussian", "sd": 1}}]})");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("CSV parsing") {
  const auto t = parse_csv("a,b\n1,2.5\n-3e-1,4\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows() == 2);
  CHECK(t.column("a") == std::vector<double>{1.0, -0.3});
  CHECK_THROWS_AS(t.column("c"), Error);
  try {
    parse_csv("a,b\n1,2\n3,\n");
    FAIL("expected InvalidData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidData);
    CHECK(e.position() == std::size_t{2});
  }
  CHECK_THROWS_AS(parse_csv("a\n1\nx\n"), Error);
  CHECK_THROWS_AS(parse_csv("a\n1,5\n"), Error);
}

TEST_CASE("missing files raise IoError") {
  try {
    load_model_file("/nonexistent/model.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
