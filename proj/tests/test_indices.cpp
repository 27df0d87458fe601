#include <doctest.h>

#include <cmath>

#include "bnuq/divergences.hpp"
#include "bnuq/error.hpp"
#include "bnuq/indices.hpp"
#include "support.hpp"

using namespace bnuq;

namespace {

Eigen::MatrixXd total_effect_matrix(const DirectedGraphModel& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Vertex v = 0; v < m.size(); ++v) {
    const auto& c = std::get<LinearGaussianCPD>(m.cpd(v));
    const auto& ps = m.graph().parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) b(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(ps[i])) = c.coefficients[i];
  }
  return (Eigen::MatrixXd::Identity(n, n) - b).inverse();
}

double sd_of(const DirectedGraphModel& m, Vertex v) { return std::get<LinearGaussianCPD>(m.cpd(v)).noise_sd; }

}  // namespace

TEST_CASE("whole-model Gaussian index matches the covariance oracle") {
  testing::Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = testing::random_linear_gaussian(rng, 2 + rep % 6);
    const Vertex k = m.size() - 1;
    const double a = testing::uniform(rng, -2.0, 2.0);
    const auto oracle = testing::gaussian_oracle(m);
    const double cov = oracle.cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (double eta : {0.1, 1.0}) {
      const double expected = std::sqrt(2.0 * a * a * cov * eta);
      const auto r = gaussian_model_uncertainty_index(m, k, a, eta);
      CHECK(r.plus.value == doctest::Approx(expected).epsilon(1e-10));
      CHECK(r.minus.value == doctest::Approx(-expected).epsilon(1e-10));
      const auto g = model_uncertainty_index(m, QuantityOfInterest::affine(k, a), eta);
      CHECK(g.backend == Backend::gaussian_closed_form);
      CHECK(g.plus.value == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("per-vertex Gaussian index equals the total effect times the noise scale") {
  testing::Rng rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = testing::random_linear_gaussian(rng, 3 + rep % 5, 0.6);
    const Vertex k = m.size() - 1;
    const auto t = total_effect_matrix(m);
    for (Vertex l = 0; l < m.size(); ++l) {
      const double b = t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
      const auto closure = qoi_ancestor_closure(m.graph(), QuantityOfInterest::affine(k));
      if (std::binary_search(closure.begin(), closure.end(), l)) {
        CHECK(effective_coefficient(m, k, l).value == doctest::Approx(b).epsilon(1e-12).scale(1.0));
      } else {
        CHECK(b == 0.0);
        CHECK_THROWS_AS(effective_coefficient(m, k, l), Error);
      }
      const double expected = std::fabs(b) * std::sqrt(2.0 * sd_of(m, l) * sd_of(m, l) * 0.5);
      const auto free = sensitivity_index(m, QuantityOfInterest::affine(k), l, 0.5);
      const auto fixed =
          sensitivity_index(m, QuantityOfInterest::affine(k), l, 0.5, AmbiguityKind::vertex_fixed_parents);
      CHECK(free.plus.value == doctest::Approx(expected).epsilon(1e-10).scale(1e-300));
      CHECK(free.minus.value == doctest::Approx(-expected).epsilon(1e-10).scale(1e-300));
      CHECK(fixed.plus.value == free.plus.value);
      CHECK(gaussian_sensitivity(m, k, 1.0, l, 0.5).plus.value ==
            doctest::Approx(expected).epsilon(1e-10).scale(1e-300));
    }
  }
}

TEST_CASE("vertices outside the ancestor closure have zero index") {
  testing::Rng rng(33);
  for (int rep = 0; rep < 30; ++rep) {
    const auto m = testing::random_linear_gaussian(rng, 6, 0.3);
    const Vertex k = rep % m.size();
    const auto qoi = QuantityOfInterest::affine(k);
    const auto closure = qoi_ancestor_closure(m.graph(), qoi);
    for (Vertex l = 0; l < m.size(); ++l) {
      if (std::binary_search(closure.begin(), closure.end(), l)) continue;
      const auto r = sensitivity_index(m, qoi, l, 1.0);
      CHECK(r.plus.value == 0.0);
      CHECK(r.minus.value == 0.0);
    }
  }
}

TEST_CASE("the Gaussian optimizer attains the index with KL equal to the budget") {
  testing::Rng rng(34);
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = testing::random_linear_gaussian(rng, 5);
    const Vertex k = 4;
    const double eta = 0.3;
    const auto index = model_uncertainty_index(m, QuantityOfInterest::affine(k), eta);
    for (int sign : {+1, -1}) {
      const auto opt = optimizer_network(m, QuantityOfInterest::affine(k), eta, sign);
      CHECK(kl_chain_rule(opt.model, m).total == doctest::Approx(eta).epsilon(1e-8));
      const double shift = testing::gaussian_oracle(opt.model).mean(4) - testing::gaussian_oracle(m).mean(4);
      const double target = sign > 0 ? index.plus.value : index.minus.value;
      CHECK(shift == doctest::Approx(target).epsilon(1e-8));
    }
  }
}

TEST_CASE("discrete single-vertex index matches the simplex oracle") {
  testing::Rng rng(35);
  const DirectedGraph g(testing::Parents{{}});
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = testing::random_binary_network(rng, g);
    const auto& c = std::get<FiniteDiscreteCPD>(m.cpd(0));
    for (double eta : {0.01, 0.1, 0.5}) {
      const auto oracle = testing::simplex_search({0.0, 1.0}, {c.table[0], c.table[1]}, eta);
      const auto r = sensitivity_index(m, QuantityOfInterest::affine(0), 0, eta);
      CHECK(r.backend == Backend::exact_enumeration);
      CHECK(r.plus.value == doctest::Approx(oracle.plus).epsilon(1e-6).scale(1.0));
      CHECK(r.minus.value == doctest::Approx(oracle.minus).epsilon(1e-6).scale(1.0));
      const auto w = model_uncertainty_index(m, QuantityOfInterest::affine(0), eta);
      CHECK(w.plus.value == doctest::Approx(oracle.plus).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("Monte Carlo whole-model index approaches the closed form") {
  testing::Rng rng(36);
  const auto m = testing::random_linear_gaussian(rng, 4);
  McConfig cfg;
  cfg.samples = 400000;
  cfg.backend = BackendChoice::monte_carlo;
  const auto mc = model_uncertainty_index(m, QuantityOfInterest::affine(3), 0.2, cfg);
  const auto exact = model_uncertainty_index(m, QuantityOfInterest::affine(3), 0.2);
  CHECK(mc.backend == Backend::monte_carlo);
  CHECK(mc.plus.value == doctest::Approx(exact.plus.value).epsilon(0.03));
  CHECK(mc.minus.value == doctest::Approx(exact.minus.value).epsilon(0.03));
}

TEST_CASE("Monte Carlo results are reproducible and thread independent") {
  testing::Rng rng(37);
  const auto m = testing::random_linear_gaussian(rng, 4);
  McConfig cfg;
  cfg.samples = 50000;
  cfg.backend = BackendChoice::monte_carlo;
  const auto a = model_uncertainty_index(m, QuantityOfInterest::affine(3), 0.2, cfg);
  cfg.exec = Exec::serial;
  const auto b = model_uncertainty_index(m, QuantityOfInterest::affine(3), 0.2, cfg);
  CHECK(a.plus.value == b.plus.value);
  CHECK(a.minus.value == b.minus.value);
}

TEST_CASE("sweeps agree with single evaluations") {
  testing::Rng rng(38);
  const auto m = testing::random_linear_gaussian(rng, 5);
  const std::vector<double> etas{0.0, 0.1, 0.7};
  const auto qoi = QuantityOfInterest::affine(4);
  const auto whole = model_uncertainty_sweep(m, qoi, etas);
  const auto per = sensitivity_sweep(m, qoi, 1, etas);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    CHECK(whole[i].plus.value == doctest::Approx(model_uncertainty_index(m, qoi, etas[i]).plus.value).epsilon(1e-12));
    CHECK(per[i].plus.value == doctest::Approx(sensitivity_index(m, qoi, 1, etas[i]).plus.value).epsilon(1e-12));
  }
  CHECK(whole[0].plus.value == 0.0);
}

TEST_CASE("indices grow with the budget") {
  testing::Rng rng(39);
  const auto m = testing::random_linear_gaussian(rng, 4);
  double last = 0.0;
  for (double eta : {0.01, 0.1, 0.5, 2.0}) {
    const double v = sensitivity_index(m, QuantityOfInterest::affine(3), 0, eta).plus.value;
    CHECK(v >= last);
    last = v;
  }
}

TEST_CASE("additive non-Gaussian noise uses the exact linear CGF") {
  const DirectedGraph g(testing::Parents{{}, {0}});
  const DirectedGraphModel m(
      g, {AdditiveNoiseCPD{0.0, {}, PointMassDensity{{-1.0, 1.0}, {0.5, 0.5}}}, LinearGaussianCPD{0.0, {2.0}, 1.0}});
  const auto r = sensitivity_index(m, QuantityOfInterest::affine(1), 0, 0.1);
  CHECK(r.backend == Backend::linear_closed_form);
  const auto oracle = testing::simplex_search({-2.0, 2.0}, {0.5, 0.5}, 0.1);
  CHECK(r.plus.value == doctest::Approx(oracle.plus).epsilon(1e-6));
  CHECK(r.minus.value == doctest::Approx(oracle.minus).epsilon(1e-6));
}

TEST_CASE("QoI means") {
  testing::Rng rng(40);
  const auto m = testing::random_linear_gaussian(rng, 5);
  const auto oracle = testing::gaussian_oracle(m);
  CHECK(qoi_mean(m, QuantityOfInterest::affine(4, 2.0, 1.0)) == doctest::Approx(2.0 * oracle.mean(4) + 1.0).epsilon(1e-12));
}

TEST_CASE("crossing QoIs have no whole-model index") {
  const DirectedGraph g(testing::Parents{{}, {0}, {0}});
  const DirectedGraphModel m(g, {LinearGaussianCPD{0.0, {}, 1.0}, LinearGaussianCPD{0.0, {1.0}, 0.1},
                                 LinearGaussianCPD{1.0, {-1.0}, 0.1}});
  CHECK_THROWS_AS(model_uncertainty_index(m, QuantityOfInterest::crossing(1, 2, 0), 0.1), Error);
}

TEST_CASE("closed-form backend request fails outside the closed-form family") {
  const DirectedGraph g(testing::Parents{{}, {0}});
  auto expr = Expression::parse("x^2");
  const DirectedGraphModel m(g, {LinearGaussianCPD{0.0, {}, 1.0}, DeterministicCPD::bind(expr, {"x"})});
  McConfig cfg;
  cfg.backend = BackendChoice::closed_form;
  try {
    sensitivity_index(m, QuantityOfInterest::affine(1), 0, 0.1, AmbiguityKind::vertex_free_parents, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonGaussianModel);
  }
}
