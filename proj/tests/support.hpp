#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bnuq/model.hpp"
#include "bnuq/qoi.hpp"

namespace bnuq::testing {

using Rng = std::mt19937_64;
using Parents = std::vector<std::vector<Vertex>>;

double uniform(Rng& rng, double lo, double hi);

// Vertices in topological id order; each earlier vertex is a parent with probability `edge_p`.
DirectedGraph random_dag(Rng& rng, std::size_t n, double edge_p = 0.5);
DirectedGraphModel random_linear_gaussian(Rng& rng, std::size_t n, double edge_p = 0.5);
DirectedGraphModel random_linear_gaussian_on(Rng& rng, const DirectedGraph& g);
DirectedGraphModel random_binary_network(Rng& rng, const DirectedGraph& g);
// Every DAG on n labelled vertices, parents listed ascending.
std::vector<DirectedGraph> all_dags(std::size_t n);

struct GaussianOracle {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
// (I - B)^{-1} moments of a linear-Gaussian network.
GaussianOracle gaussian_oracle(const DirectedGraphModel& m);
double gaussian_kl_oracle(const GaussianOracle& q, const GaussianOracle& p);

// Brute-force joint of a binary or finite network: probability of every state,
// states enumerated with vertex 0 least significant.
struct JointOracle {
  std::vector<std::vector<double>> states;
  std::vector<double> probs;
};
JointOracle discrete_joint_oracle(const DirectedGraphModel& m);

// sup / inf over laws Q on the support of (values, probs) with KL(Q||P) <= eta
// of E_Q f - E_P f, by a grid over the simplex refined along the constraint
// boundary. Supports up to three distinct values.
struct SimplexBound {
  double plus;
  double minus;
};
SimplexBound simplex_search(const std::vector<double>& values, const std::vector<double>& probs, double eta);

// Integrates dC_i/dt = K_i P_i (1 - C_H - C_O)^2 - C_i^2 from empty coverage
// until the state stops moving; returns (C_H, C_O).
std::pair<double, double> langmuir_ode_steady_state(double k_h2, double k_o2, double p_h2, double p_o2);

double sample_mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace bnuq::testing
