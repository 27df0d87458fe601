#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bnuq/cpd.hpp"
#include "bnuq/graph.hpp"
#include "bnuq/kernels.hpp"

namespace bnuq {

struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  SampleMatrix() = default;
  SampleMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::vector<double> column(std::size_t j) const;
};

class DirectedGraphModel {
 public:
  DirectedGraphModel() = default;
  // Validates each CPD and that it consumes exactly the vertex's parents.
  DirectedGraphModel(DirectedGraph graph, std::vector<ConditionalDensity> cpds);

  const DirectedGraph& graph() const { return graph_; }
  std::size_t size() const { return graph_.vertex_count(); }
  const ConditionalDensity& cpd(Vertex v) const;
  const std::vector<ConditionalDensity>& cpds() const { return cpds_; }
  const std::vector<Vertex>& order() const { return order_; }

  bool is_stochastic(Vertex v) const { return !cpd_is_deterministic(cpd(v)); }
  bool is_linear_gaussian() const;
  bool is_finite_discrete() const;

  // Copy with one CPD replaced; parent list unchanged.
  DirectedGraphModel with_cpd(Vertex v, ConditionalDensity cpd) const;

  // Draws x_v given the parent values already present in `row`.
  double sample_vertex(Vertex v, std::span<const double> row, Engine& rng) const;
  double log_density_vertex(Vertex v, std::span<const double> row) const;

 private:
  DirectedGraph graph_;
  std::vector<ConditionalDensity> cpds_;
  std::vector<Vertex> order_;
};

double joint_log_density(const DirectedGraphModel& model, std::span<const double> x);

// Forward sampling in blocks of kSampleBlock rows, block b seeded by
// stream_seed(seed, b); output is identical for serial and parallel execution.
SampleMatrix sample(const DirectedGraphModel& model, std::size_t n, std::uint64_t seed,
                    Exec exec = Exec::parallel);

// Forward-samples only `vertices` (must be closed under ancestors) into `row`.
void sample_subset(const DirectedGraphModel& model, std::span<const Vertex> topo_vertices,
                   std::span<double> row, Engine& rng);

struct GaussianJointMoments {
  std::vector<double> mean;
  std::vector<double> covariance;  // n x n row-major
  std::size_t n = 0;
  double cov(std::size_t i, std::size_t j) const { return covariance[i * n + j]; }
};

// Requires every CPD to be linear-Gaussian.
GaussianJointMoments gaussian_joint_moments(const DirectedGraphModel& model);
// First two moments for models whose CPDs all have a linear form (additive
// noise of any family); nullopt otherwise.
std::optional<GaussianJointMoments> linear_joint_moments(const DirectedGraphModel& model);

// Per-vertex OLS of X_i on X_{pi_i} with MLE variance (divisor n).
DirectedGraphModel fit_linear_gaussian_mle(const SampleMatrix& data, const DirectedGraph& graph);

// Joint states of a fully finite-discrete model, with probabilities. Throws
// UnsupportedFamily if the model is not discrete or exceeds `max_states`.
struct DiscreteJoint {
  std::vector<std::size_t> cardinalities;
  std::vector<std::vector<double>> states;
  std::vector<double> probs;
};
DiscreteJoint enumerate_discrete(const DirectedGraphModel& model, std::size_t max_states = 1u << 20);

}  // namespace bnuq
