#include <doctest.h>

#include <cmath>

#include "bnuq/catalog.hpp"
#include "bnuq/error.hpp"
#include "bnuq/indices.hpp"
#include "support.hpp"

using namespace bnuq;

namespace {

double grid_argmax_crossing(const OrrParams& p) {
  // min of the two lines is unimodal; scan wide, then refine with step 1e-4.
  const auto objective = [&](double x0) {
    return std::min(orr_conditional_mean(p, 1, x0), orr_conditional_mean(p, 2, x0));
  };
  double best = -INFINITY, arg = 0.0;
  for (double x0 = -20.0; x0 <= 20.0; x0 += 1e-2) {
    if (objective(x0) > best) {
      best = objective(x0);
      arg = x0;
    }
  }
  const double lo = arg - 1e-2;
  for (int i = 0; i <= 200; ++i) {
    const double x0 = lo + 1e-4 * i;
    if (objective(x0) > best) {
      best = objective(x0);
      arg = x0;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("Langmuir coverages: symmetric and single-species limits") {
  const LangmuirParams p;
  const auto sym = langmuir_coverages(1.0, 1.0, p);
  CHECK(sym.hydrogen == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(sym.oxygen == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto single = langmuir_coverages(4.0, 0.0, p);
  CHECK(single.oxygen == 0.0);
  CHECK(single.hydrogen == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("Langmuir coverages lie in the open simplex") {
  const LangmuirParams p;
  testing::Rng rng(51);
  for (int i = 0; i < 1000; ++i) {
    const auto c = langmuir_equilibrium(testing::uniform(rng, -0.5, 0.5), testing::uniform(rng, -0.5, 0.5), p);
    CHECK(c.hydrogen > 0.0);
    CHECK(c.oxygen > 0.0);
    CHECK(c.hydrogen + c.oxygen < 1.0);
  }
}

TEST_CASE("Langmuir equilibrium is the steady state of the rate equations") {
  const LangmuirParams p;
  for (const auto& [dh, dox] : std::vector<std::pair<double, double>>{{0.1, 0.05}, {-0.05, 0.02}, {0.0, -0.1}}) {
    const double kh = langmuir_equilibrium_constant(dh, p), ko = langmuir_equilibrium_constant(dox, p);
    const auto c = langmuir_coverages(kh, ko, p);
    const auto [h, o] = testing::langmuir_ode_steady_state(kh, ko, p.p_h2, p.p_o2);
    CHECK(c.hydrogen == doctest::Approx(h).epsilon(1e-8).scale(1.0));
    CHECK(c.oxygen == doctest::Approx(o).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("Langmuir network has two stochastic vertices") {
  const auto net = build_langmuir_network();
  std::vector<Vertex> stochastic;
  for (Vertex v = 0; v < net.model.size(); ++v) {
    if (net.model.is_stochastic(v)) stochastic.push_back(v);
  }
  CHECK(stochastic == std::vector<Vertex>{0, 1});
  const auto& g = std::get<GammaCPD>(net.model.cpd(0));
  CHECK(g.mean() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::sqrt(g.shape) * g.scale == doctest::Approx(0.05).epsilon(1e-14));
  LangmuirParams bad;
  bad.y_h = 0.2;
  CHECK_THROWS_AS(build_langmuir_network(bad), Error);
}

TEST_CASE("Langmuir correlation index vanishes with the regression noise") {
  McConfig cfg;
  cfg.outer = 100;
  cfg.inner = 2000;
  LangmuirParams wide, narrow;
  narrow.sigma_omega = 1e-4;
  const auto a = build_langmuir_network(wide);
  const auto b = build_langmuir_network(narrow);
  const double ia = sensitivity_index(a.model, a.qois.front().second, 1, 0.5, AmbiguityKind::vertex_free_parents, cfg).plus.value;
  const double ib = sensitivity_index(b.model, b.qois.front().second, 1, 0.5, AmbiguityKind::vertex_free_parents, cfg).plus.value;
  CHECK(ia > 0.0);
  CHECK(ib < 0.01 * ia);
}

TEST_CASE("ORR crossing matches the grid argmax") {
  const OrrParams p;
  CHECK(orr_optimal_binding_energy(p) == doctest::Approx(grid_argmax_crossing(p)).epsilon(1e-4).scale(1.0));
  testing::Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    OrrParams q = p;
    q.beta_y1_0 += testing::uniform(rng, -0.2, 0.2);
    q.beta_y2_0 += testing::uniform(rng, -0.2, 0.2);
    q.beta_y1_x *= testing::uniform(rng, 0.8, 1.2);
    q.beta_y2_x *= testing::uniform(rng, 0.8, 1.2);
    for (double& m : q.means) m += testing::uniform(rng, -0.02, 0.02);
    CHECK(orr_optimal_binding_energy(q) == doctest::Approx(grid_argmax_crossing(q)).epsilon(1.5e-4).scale(1.0));
  }
  OrrParams flat = p;
  flat.beta_y2_x = flat.beta_y1_x;
  CHECK_THROWS_AS(orr_optimal_binding_energy(flat), Error);
}

TEST_CASE("ORR crossing mean through the generic QoI path") {
  const auto net = build_orr_network();
  CHECK(qoi_mean(net.model, net.qoi("xstar")) == doctest::Approx(orr_optimal_binding_energy(OrrParams{})).epsilon(1e-12));
  CHECK(orr_optimal_binding_energy(OrrParams{}) == doctest::Approx(1.8855).epsilon(1e-3));
}

TEST_CASE("ORR y1 mean from the joint moments") {
  const OrrParams p;
  const auto net = build_orr_network(p);
  const auto mom = gaussian_joint_moments(net.model);
  const double expected = p.beta_y1_0 + p.beta_y1_x * (p.means[0] + p.means[1] + p.means[2]) + p.means[3] + p.means[4] +
                          p.means[5] + p.means[6];
  CHECK(mom.mean[12] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(mom.cov(12, 13) != 0.0);
}

TEST_CASE("ORR sensitivity intervals") {
  const OrrParams p;
  CHECK(orr_sensitivity_interval(p, "c1", 1.0).hi == doctest::Approx(std::sqrt(2.0 * 0.0347) / 1.0675).epsilon(1e-12));
  CHECK(orr_sensitivity_interval(p, "e0", 1.0).hi == doctest::Approx(std::sqrt(0.0658)).epsilon(1e-12));
  CHECK(orr_sensitivity_interval(p, "s2", 0.9173).hi == doctest::Approx(0.0928).epsilon(0.02));
  CHECK_THROWS_AS(orr_sensitivity_interval(p, "x", 1.0), Error);
  const auto net = build_orr_network(p);
  for (const auto& name : OrrParams::omega_names()) {
    const Vertex l = p.omega_index(name);
    const auto generic = sensitivity_index(net.model, net.qoi("xstar"), l, 1.0);
    const auto interval = orr_sensitivity_interval(p, name, 1.0);
    CHECK(generic.plus.value == doctest::Approx(interval.hi).epsilon(1e-9));
    CHECK(generic.minus.value == doctest::Approx(interval.lo).epsilon(1e-9));
  }
}

TEST_CASE("ORR effective coefficients") {
  const OrrParams p;
  const auto net = build_orr_network(p);
  CHECK(effective_coefficient(net.model, 12, 0).value == doctest::Approx(p.beta_y1_x).epsilon(1e-14));
  CHECK(effective_coefficient(net.model, 12, 3).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(effective_coefficient(net.model, 13, 0).value == doctest::Approx(p.beta_y2_x).epsilon(1e-14));
  CHECK(effective_coefficient(net.model, 13, 7).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(effective_coefficient(net.model, 12, 7), Error);
  CHECK(sensitivity_index(net.model, net.qoi("y1"), 7, 1.0).plus.value == 0.0);
}

TEST_CASE("Markov chain: downstream perturbations vanish and the two sets agree") {
  const double beta = 0.7;
  std::vector<ConditionalDensity> cpds{LinearGaussianCPD{0.0, {}, 1.0}};
  for (int i = 0; i < 5; ++i) cpds.push_back(LinearGaussianCPD{0.1, {beta}, 0.5});
  const auto m = build_markov_chain(cpds);
  const auto qoi = QuantityOfInterest::affine(3);
  for (Vertex l = 0; l < m.size(); ++l) {
    const auto free = sensitivity_index(m, qoi, l, 0.4);
    const auto fixed = sensitivity_index(m, qoi, l, 0.4, AmbiguityKind::vertex_fixed_parents);
    CHECK(free.plus.value == doctest::Approx(fixed.plus.value).epsilon(1e-9).scale(1e-300));
    if (l > 3) CHECK(free.plus.value == 0.0);
    if (l >= 1 && l <= 3) {
      const double expected = std::pow(beta, 3.0 - static_cast<double>(l)) * std::sqrt(2.0 * 0.25 * 0.4);
      CHECK(free.plus.value == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(build_markov_chain({LinearGaussianCPD{0.0, {1.0}, 1.0}}), Error);
  CHECK_THROWS_AS(build_markov_chain({}), Error);
}

TEST_CASE("presets are addressable by name") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
  CHECK(preset("orr-tableB1").qois.front().first == "xstar");
  CHECK_THROWS_AS(preset("nope"), Error);
}
