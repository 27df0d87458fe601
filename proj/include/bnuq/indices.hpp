#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnuq/model.hpp"
#include "bnuq/qoi.hpp"
#include "bnuq/tilt.hpp"

namespace bnuq {

enum class AmbiguityKind { whole_model, vertex_free_parents, vertex_fixed_parents };
enum class Backend { gaussian_closed_form, linear_closed_form, exact_enumeration, monte_carlo };
enum class BackendChoice { automatic, closed_form, monte_carlo };

const char* to_string(AmbiguityKind k);
const char* to_string(Backend b);

struct McConfig {
  std::size_t samples = 100000;  // whole-model index, and the inner size when rho_l is empty
  std::uint64_t seed = 1;
  std::size_t outer = 2000;
  std::size_t inner = 20000;
  std::size_t f_samples = 256;  // clamped forward samples per F evaluation
  BackendChoice backend = BackendChoice::automatic;
  Exec exec = Exec::parallel;
  bool jensen = false;
  SolveOptions solve;
};

struct IndexResult {
  TiltSolution plus;
  TiltSolution minus;
  AmbiguityKind kind = AmbiguityKind::whole_model;
  bool tight = true;
  Backend backend = Backend::monte_carlo;
  bool jensen = false;
  std::optional<Vertex> vertex;
  double eta = 0.0;
  std::vector<std::string> diagnostics;
};

IndexResult model_uncertainty_index(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                    double eta, const McConfig& cfg = {});

// I = +-sqrt(2 a^2 C_kk eta) for a linear-Gaussian ancestor closure of k.
IndexResult gaussian_model_uncertainty_index(const DirectedGraphModel& model, Vertex k, double a,
                                             double eta);

struct OptimizerNetwork {
  DirectedGraphModel model;
  TiltSolution solution;
};

// The attaining alternative Q+ (sign = +1) or Q- (sign = -1).
OptimizerNetwork optimizer_network(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                   double eta, int sign);

// E[f | x_l, x_{rho_l}]: affine closed form when every vertex between l and the
// QoI has a linear form, clamped forward sampling with common random numbers
// otherwise. Holds a reference to `model`.
class ConditionalMean {
 public:
  bool closed_form() const { return closed_form_; }
  // Reads only the entries of `row` indexed by the ancestor closure of l.
  double operator()(std::span<const double> row) const;
  // Closed form only: F = constant + sum_j coefficients[j] x_j.
  double constant() const { return constant_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

 private:
  friend ConditionalMean conditional_mean_F(const DirectedGraphModel&, const QuantityOfInterest&,
                                            Vertex, const McConfig&);
  const DirectedGraphModel* model_ = nullptr;
  QuantityOfInterest qoi_;
  bool closed_form_ = false;
  double constant_ = 0.0;
  std::vector<double> coefficients_;
  std::vector<Vertex> nonzero_;
  std::vector<Vertex> free_;  // sampled vertices, topological order
  std::size_t draws_ = 1;
  Engine prototype_;
};

ConditionalMean conditional_mean_F(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                   Vertex l, const McConfig& cfg = {});

// Sweeps reuse one set of samples across the eta grid.
std::vector<IndexResult> model_uncertainty_sweep(const DirectedGraphModel& model,
                                                 const QuantityOfInterest& qoi,
                                                 std::span<const double> etas, const McConfig& cfg = {});
std::vector<IndexResult> sensitivity_sweep(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                           Vertex l, std::span<const double> etas,
                                           AmbiguityKind set = AmbiguityKind::vertex_free_parents,
                                           const McConfig& cfg = {});

IndexResult sensitivity_index(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                              Vertex l, double eta, AmbiguityKind set = AmbiguityKind::vertex_free_parents,
                              const McConfig& cfg = {});

struct EffectiveCoefficient {
  double value = 0.0;
  std::vector<std::pair<std::vector<Vertex>, double>> paths;
  bool paths_truncated = false;
};

EffectiveCoefficient effective_coefficient(const DirectedGraphModel& model, Vertex k, Vertex l);

// +-|b_kl| sqrt(2 a^2 sigma_l^2 eta); identical for both per-vertex sets.
IndexResult gaussian_sensitivity(const DirectedGraphModel& model, Vertex k, double a, Vertex l,
                                 double eta, AmbiguityKind set = AmbiguityKind::vertex_free_parents);

// For a QoI that is linear in the noise terms (affine, or a crossing), the
// total effect of every vertex: f - E f = sum_j t_j (x_j - E[x_j | parents]).
// Nullopt unless the ancestor closure has linear forms.
std::optional<std::vector<double>> qoi_total_effects(const DirectedGraphModel& model,
                                                     const QuantityOfInterest& qoi);

// E_P[f]: closed form for linear models and crossings, exact for discrete
// models, Monte Carlo otherwise.
double qoi_mean(const DirectedGraphModel& model, const QuantityOfInterest& qoi, const McConfig& cfg = {});

}  // namespace bnuq
