#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bnuq/model.hpp"
#include "bnuq/qoi.hpp"
#include "bnuq/divergences.hpp"

namespace bnuq {

struct CatalogModel {
  DirectedGraphModel model;
  // First entry is the primary QoI.
  std::vector<std::pair<std::string, QuantityOfInterest>> qois;

  const QuantityOfInterest& qoi(const std::string& name) const;
};

// Illustrative defaults: the fitted regression of the Langmuir study is not published.
struct LangmuirParams {
  double x_h = 0.1;
  double y_h = 0.05;
  double a = 1.2;
  double b = -0.1;
  double sigma_omega = 0.02;
  double p_h2 = 1.0;
  double p_o2 = 1.0;
  double temperature = 500.0;
  double k_b = 8.617333262e-5;
  double scale = 1.0;  // G = -2 scale dE

  void validate() const;
};

struct Coverages {
  double hydrogen;
  double oxygen;
};

// K = exp(2 scale dE / (k_B T)) / (P_H2 + P_O2).
double langmuir_equilibrium_constant(double dE, const LangmuirParams& p);
Coverages langmuir_coverages(double k_h2, double k_o2, const LangmuirParams& p);
Coverages langmuir_equilibrium(double dE_h, double dE_o, const LangmuirParams& p);

// Vertices dE_H, dE_O, K_H2, K_O2, C_H, C_O; QoIs C_H and C_O.
CatalogModel build_langmuir_network(const LangmuirParams& p = {});

struct OrrParams {
  double beta_y1_0 = 0.0595;
  double beta_y2_0 = 1.8231;
  double beta_y1_x = 0.5111;
  double beta_y2_x = -0.5564;
  // Means and variances of the omega vertices in the order
  // e0 d0 s0 e1 d1 s1 c1 e2 d2 s2 c2.
  std::vector<double> means = {0.0, -0.0754, 0.0067, 0.0, -0.0222, -0.2967, 0.0, 0.0, -0.0222, -0.1209, 0.0};
  std::vector<double> variances = {0.0329, 0.1032, 0.0010, 0.0065, 0.0354, 0.0046, 0.0347,
                                   0.0065, 0.0354, 0.0054, 0.0204};

  static const std::vector<std::string>& omega_names();
  std::size_t omega_index(const std::string& name) const;  // throws InvalidVertex
  void validate() const;
};

inline constexpr double kOrrReportedMean = 2.0434;

// Vertex order: the eleven omegas, then x, y1, y2. QoIs xstar (crossing), y1, y2.
CatalogModel build_orr_network(const OrrParams& p = {}, double x0 = 0.0);

double orr_conditional_mean(const OrrParams& p, int i, double x0);
// Crossing of the two conditional-mean lines; throws ParallelLines.
double orr_optimal_binding_energy(const OrrParams& p);
// Symmetric interval for x*_Q - x*_P when only omega `name` varies.
Interval orr_sensitivity_interval(const OrrParams& p, const std::string& name, double eta);

// Vertex i has parent i-1; labels X1..Xn unless given.
DirectedGraphModel build_markov_chain(std::vector<ConditionalDensity> cpds, std::vector<std::string> labels = {});

std::vector<std::string> preset_names();
CatalogModel preset(const std::string& name);

}  // namespace bnuq
