#include <doctest.h>

#include <cmath>

#include "bnuq/error.hpp"
#include "bnuq/model.hpp"
#include "support.hpp"

using namespace bnuq;

TEST_CASE("models reject CPDs that do not match the parent lists") {
  const DirectedGraph g(testing::Parents{{}, {0}});
  CHECK_THROWS_AS(DirectedGraphModel(g, {LinearGaussianCPD{}, LinearGaussianCPD{}}), Error);
  CHECK_THROWS_AS(DirectedGraphModel(g, {LinearGaussianCPD{}}), Error);
  CHECK_NOTHROW(DirectedGraphModel(g, {LinearGaussianCPD{}, LinearGaussianCPD{0.0, {1.0}, 1.0}}));
}

TEST_CASE("sampling is identical for serial and parallel execution") {
  testing::Rng rng(2);
  const auto m = testing::random_linear_gaussian(rng, 6);
  const auto a = sample(m, 10000, 99, Exec::serial);
  const auto b = sample(m, 10000, 99, Exec::parallel);
  CHECK(a.data == b.data);
  const auto c = sample(m, 10000, 100, Exec::serial);
  CHECK(a.data != c.data);
}

TEST_CASE("Gaussian joint moments match the (I - B)^-1 oracle") {
  testing::Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = testing::random_linear_gaussian(rng, 7);
    const auto mom = gaussian_joint_moments(m);
    const auto oracle = testing::gaussian_oracle(m);
    for (Vertex i = 0; i < m.size(); ++i) {
      CHECK(mom.mean[i] == doctest::Approx(oracle.mean(static_cast<Eigen::Index>(i))).epsilon(1e-12));
      for (Vertex j = 0; j < m.size(); ++j) {
        CHECK(mom.cov(i, j) == doctest::Approx(oracle.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                                   .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sample moments agree with the Gaussian closed form") {
  testing::Rng rng(8);
  const auto m = testing::random_linear_gaussian(rng, 5);
  const auto mom = gaussian_joint_moments(m);
  const auto s = sample(m, 200000, 5);
  for (Vertex v = 0; v < m.size(); ++v) {
    const auto col = s.column(v);
    const double se = std::sqrt(mom.cov(v, v) / 200000.0);
    CHECK(std::fabs(testing::sample_mean(col) - mom.mean[v]) < 5.0 * se);
    CHECK(testing::sample_sd(col) == doctest::Approx(std::sqrt(mom.cov(v, v))).epsilon(0.02));
  }
}

TEST_CASE("MLE recovers linear-Gaussian parameters") {
  const DirectedGraph g(testing::Parents{{}, {0}, {0, 1}});
  const DirectedGraphModel truth(g, {LinearGaussianCPD{1.0, {}, 0.5}, LinearGaussianCPD{-0.5, {2.0}, 0.3},
                                     LinearGaussianCPD{0.2, {0.7, -1.1}, 0.8}});
  const auto fitted = fit_linear_gaussian_mle(sample(truth, 100000, 17), g);
  const auto& c = std::get<LinearGaussianCPD>(fitted.cpd(2));
  CHECK(c.intercept == doctest::Approx(0.2).epsilon(0.05));
  CHECK(c.coefficients[0] == doctest::Approx(0.7).epsilon(0.02));
  CHECK(c.coefficients[1] == doctest::Approx(-1.1).epsilon(0.02));
  CHECK(c.noise_sd == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("MLE rejects rank-deficient and short designs") {
  const DirectedGraph g(testing::Parents{{}, {0}});
  SampleMatrix constant(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    constant.at(i, 0) = 1.0;
    constant.at(i, 1) = static_cast<double>(i);
  }
  CHECK_THROWS_AS(fit_linear_gaussian_mle(constant, g), Error);
  CHECK_THROWS_AS(fit_linear_gaussian_mle(SampleMatrix(1, 2), g), Error);
}

TEST_CASE("discrete joint enumeration matches the brute-force oracle") {
  testing::Rng rng(6);
  for (const auto& g : testing::all_dags(3)) {
    const auto m = testing::random_binary_network(rng, g);
    const auto joint = enumerate_discrete(m);
    const auto oracle = testing::discrete_joint_oracle(m);
    double total = 0.0;
    for (std::size_t s = 0; s < joint.states.size(); ++s) {
      total += joint.probs[s];
      for (std::size_t o = 0; o < oracle.states.size(); ++o) {
        if (oracle.states[o] == joint.states[s]) CHECK(joint.probs[s] == doctest::Approx(oracle.probs[o]));
      }
      CHECK(std::exp(joint_log_density(m, joint.states[s])) == doctest::Approx(joint.probs[s]));
    }
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("linear joint moments cover additive non-Gaussian noise") {
  const DirectedGraph g(testing::Parents{{}, {0}});
  const DirectedGraphModel m(g, {AdditiveNoiseCPD{1.0, {}, PointMassDensity{{-1.0, 3.0}, {0.75, 0.25}}},
                                 LinearGaussianCPD{0.0, {2.0}, 1.0}});
  const auto mom = linear_joint_moments(m);
  REQUIRE(mom);
  CHECK(mom->mean[0] == doctest::Approx(1.0));
  CHECK(mom->mean[1] == doctest::Approx(2.0));
  CHECK(mom->cov(0, 0) == doctest::Approx(3.0));
  CHECK(mom->cov(1, 1) == doctest::Approx(13.0));
  CHECK(mom->cov(0, 1) == doctest::Approx(6.0));
}
