#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bnuq/expression.hpp"
#include "bnuq/rng.hpp"

namespace bnuq {

struct LinearGaussianCPD {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double noise_sd = 1.0;

  friend bool operator==(const LinearGaussianCPD&, const LinearGaussianCPD&) = default;
};

// Parentless gamma with shape a and scale b.
struct GammaCPD {
  double shape = 1.0;
  double scale = 1.0;

  // Mean x, standard deviation x - y: a = x^2/(x-y)^2, b = (x-y)^2/x.
  static GammaCPD from_mean_offset(double x, double y);
  double mean() const { return shape * scale; }

  friend bool operator==(const GammaCPD&, const GammaCPD&) = default;
};

// x_i = g(x_parents) exactly. Expression variables are bound to parent slots.
struct DeterministicCPD {
  Expression expression;
  std::vector<std::size_t> slot_parent;  // expression variable -> parent position
  std::size_t parent_count = 0;

  static DeterministicCPD bind(Expression expression, const std::vector<std::string>& parent_names);
  double value(std::span<const double> parents) const;

  friend bool operator==(const DeterministicCPD& a, const DeterministicCPD& b) {
    return a.expression.text() == b.expression.text() && a.slot_parent == b.slot_parent &&
           a.parent_count == b.parent_count;
  }
};

// Equal-width bins; density nu_k / (n h) on bin k, zero outside [edges.front(), edges.back()].
struct HistogramDensity {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  double pdf(double x) const;
  double mean() const;
  double variance() const;

  friend bool operator==(const HistogramDensity&, const HistogramDensity&) = default;
};

struct KernelDensity {
  std::vector<double> points;
  double bandwidth = 1.0;

  double pdf(double x) const;
  double mean() const;
  double variance() const;

  friend bool operator==(const KernelDensity&, const KernelDensity&) = default;
};

struct PointMassDensity {
  std::vector<double> points;
  std::vector<double> probs;

  double mass(double x) const;
  double mean() const;
  double variance() const;

  friend bool operator==(const PointMassDensity&, const PointMassDensity&) = default;
};

using NoiseDensity = std::variant<HistogramDensity, KernelDensity, PointMassDensity>;

// x_i = intercept + coefficients . x_parents + e, e ~ noise. With no parents
// and zero intercept this is a plain histogram / KDE / point-mass CPD.
struct AdditiveNoiseCPD {
  double intercept = 0.0;
  std::vector<double> coefficients;
  NoiseDensity noise;

  friend bool operator==(const AdditiveNoiseCPD&, const AdditiveNoiseCPD&) = default;
};

// States are 0..cardinality-1 (stored as doubles in sample rows). Row index is
// the mixed-radix code of parent states, first parent most significant.
struct FiniteDiscreteCPD {
  std::size_t cardinality = 2;
  std::vector<std::size_t> parent_cardinalities;
  std::vector<double> table;

  std::size_t rows() const;
  std::size_t row_index(std::span<const double> parents) const;
  double prob(std::size_t state, std::size_t row) const { return table[row * cardinality + state]; }
  void validate() const;

  friend bool operator==(const FiniteDiscreteCPD&, const FiniteDiscreteCPD&) = default;
};

using ConditionalDensity =
    std::variant<LinearGaussianCPD, GammaCPD, DeterministicCPD, AdditiveNoiseCPD, FiniteDiscreteCPD>;

std::string cpd_kind(const ConditionalDensity& cpd);
std::size_t cpd_parent_count(const ConditionalDensity& cpd);
bool cpd_is_deterministic(const ConditionalDensity& cpd);
void validate_cpd(const ConditionalDensity& cpd);

double cpd_log_density(const ConditionalDensity& cpd, double x, std::span<const double> parents);
double cpd_sample(const ConditionalDensity& cpd, std::span<const double> parents, Engine& rng);

// Mean function and noise moments for CPDs of the form
// x = intercept + coefficients . parents + e; nullopt otherwise.
struct LinearForm {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double noise_mean = 0.0;
  double noise_variance = 0.0;
  bool gaussian = false;
};
std::optional<LinearForm> linear_form(const ConditionalDensity& cpd);

HistogramDensity fit_histogram(std::span<const double> residuals, std::size_t bin_count);
KernelDensity fit_kde(std::span<const double> residuals, std::optional<double> bandwidth = std::nullopt);
double silverman_bandwidth(std::span<const double> residuals);

double normal_log_pdf(double x, double mean, double sd);
double normal_pdf(double x, double mean, double sd);

}  // namespace bnuq
