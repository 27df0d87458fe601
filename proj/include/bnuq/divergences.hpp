#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnuq/model.hpp"

namespace bnuq {

double kl_gaussian(double q_mean, double q_sd, double p_mean, double p_sd);

// Univariate density with its support and the points where it may be
// discontinuous (quadrature panels are aligned to them).
struct Density1D {
  std::function<double(double)> pdf;
  double lower = -INFINITY;
  double upper = INFINITY;
  std::vector<double> breakpoints;
};

Density1D normal_density(double mean, double sd);
Density1D uniform_density(double lo, double hi);
Density1D gamma_density(double shape, double scale);
Density1D histogram_density(const HistogramDensity& h);
// Exact evaluation for small point sets, binned approximation above 4096 points.
Density1D kde_density(const KernelDensity& k);

struct Interval {
  double lo;
  double hi;
};

struct QuadratureResult {
  double value = 0.0;
  bool saturated = false;  // q > 0 where p = 0: value is +inf
  bool converged = false;
  std::size_t nodes = 0;
  double relative_change = 0.0;
  std::string diagnostic;
};

// Composite 20-point Gauss-Legendre estimate of the integral of q log(q/p)
// over `support` intersected with q's support, panels doubled until the
// relative change drops below 1e-6 or the node count exceeds `node_cap`.
QuadratureResult kl_density_quadrature(const Density1D& q, const Density1D& p, Interval support,
                                       std::size_t node_cap = 1u << 21);

enum class DensityModelKind { histogram, kde };

struct DensityModel {
  DensityModelKind kind = DensityModelKind::kde;
  std::size_t bins = 100;
  std::optional<double> bandwidth;
};

struct EtaEstimate {
  double eta = 0.0;
  bool saturated = false;
  QuadratureResult quadrature;
};

// KL(data density || baseline noise density). For linear-Gaussian and
// additive-noise CPDs `residuals` are x - mean(parents); for a parentless
// gamma CPD they are raw draws.
EtaEstimate eta_from_samples(const ConditionalDensity& baseline, std::span<const double> residuals,
                             const DensityModel& model = {});

struct ChainRuleDecomposition {
  std::vector<double> terms;
  std::vector<bool> violation;  // AbsoluteContinuityViolation per vertex
  double total = 0.0;
  bool exact = false;
  std::string method;  // exact_enumeration | gaussian_closed_form | monte_carlo
};

// R(Q||P) = sum_i E_Q[R(Q_i|. || P_i|.)].
ChainRuleDecomposition kl_chain_rule(const DirectedGraphModel& q, const DirectedGraphModel& p,
                                     std::size_t mc_samples = 100000, std::uint64_t seed = 1,
                                     Exec exec = Exec::parallel);

// KL between the baseline and an alternative whose single differing vertex
// gains parents; closed form for linear-Gaussian models.
double eta_solvation_edge(const DirectedGraphModel& p, const DirectedGraphModel& q);

}  // namespace bnuq
