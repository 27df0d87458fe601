#include "bnuq/catalog.hpp"

#include <charconv>
#include <cmath>

#include "bnuq/error.hpp"

namespace bnuq {

const QuantityOfInterest& CatalogModel::qoi(const std::string& name) const {
  for (const auto& [n, q] : qois) {
    if (n == name) return q;
  }
  throw Error(ErrorCode::UnsupportedQoI, "unknown QoI " + name);
}

namespace {

std::string literal(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  std::string s(buf, r.ptr);
  return x < 0.0 ? "(" + s + ")" : s;
}

}  // namespace

void LangmuirParams::validate() const {
  if (!(sigma_omega > 0.0)) throw Error(ErrorCode::InvalidParams, "sigma_omega must be positive");
  if (!(x_h > y_h && y_h > 0.0)) throw Error(ErrorCode::InvalidParams, "need x_H > y_H > 0");
  if (!(p_h2 > 0.0 && p_o2 > 0.0)) throw Error(ErrorCode::InvalidParams, "pressures must be positive");
  if (!(temperature > 0.0 && k_b > 0.0)) throw Error(ErrorCode::InvalidParams, "T and k_B must be positive");
}

double langmuir_equilibrium_constant(double dE, const LangmuirParams& p) {
  return std::exp(2.0 * p.scale * dE / (p.k_b * p.temperature)) / (p.p_h2 + p.p_o2);
}

Coverages langmuir_coverages(double k_h2, double k_o2, const LangmuirParams& p) {
  const double sh = std::sqrt(k_h2 * p.p_h2);
  const double so = std::sqrt(k_o2 * p.p_o2);
  const double den = 1.0 + sh + so;
  return {sh / den, so / den};
}

Coverages langmuir_equilibrium(double dE_h, double dE_o, const LangmuirParams& p) {
  return langmuir_coverages(langmuir_equilibrium_constant(dE_h, p), langmuir_equilibrium_constant(dE_o, p), p);
}

CatalogModel build_langmuir_network(const LangmuirParams& p) {
  p.validate();
  const std::vector<std::string> labels = {"dE_H", "dE_O", "K_H2", "K_O2", "C_H", "C_O"};
  const std::vector<std::vector<Vertex>> parents = {{}, {0}, {0}, {1}, {2, 3}, {2, 3}};
  const auto arrhenius = [&](const std::string& var) {
    return "exp(2*" + literal(p.scale) + "*" + var + "/(" + literal(p.k_b) + "*" + literal(p.temperature) +
           "))/(" + literal(p.p_h2) + "+" + literal(p.p_o2) + ")";
  };
  const std::string sh = "sqrt(K_H2*" + literal(p.p_h2) + ")";
  const std::string so = "sqrt(K_O2*" + literal(p.p_o2) + ")";
  const std::string den = "(1+" + sh + "+" + so + ")";
  std::vector<ConditionalDensity> cpds = {
      GammaCPD::from_mean_offset(p.x_h, p.y_h),
      LinearGaussianCPD{p.b, {p.a}, p.sigma_omega},
      DeterministicCPD::bind(Expression::parse(arrhenius("dE_H")), {"dE_H"}),
      DeterministicCPD::bind(Expression::parse(arrhenius("dE_O")), {"dE_O"}),
      DeterministicCPD::bind(Expression::parse(sh + "/" + den), {"K_H2", "K_O2"}),
      DeterministicCPD::bind(Expression::parse(so + "/" + den), {"K_H2", "K_O2"}),
  };
  CatalogModel out{DirectedGraphModel(DirectedGraph(parents, labels), std::move(cpds)), {}};
  out.qois.emplace_back("C_H", QuantityOfInterest(AffineQoi{4, 1.0, 0.0}, "C_H"));
  out.qois.emplace_back("C_O", QuantityOfInterest(AffineQoi{5, 1.0, 0.0}, "C_O"));
  return out;
}

const std::vector<std::string>& OrrParams::omega_names() {
  static const std::vector<std::string> names = {"e0", "d0", "s0", "e1", "d1", "s1",
                                                 "c1", "e2", "d2", "s2", "c2"};
  return names;
}

std::size_t OrrParams::omega_index(const std::string& name) const {
  const auto& n = omega_names();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] == name) return i;
  }
  throw Error(ErrorCode::InvalidVertex, "not an omega vertex: " + name);
}

void OrrParams::validate() const {
  if (means.size() != 11 || variances.size() != 11) {
    throw Error(ErrorCode::InvalidParams, "ORR needs eleven omega means and variances");
  }
  for (double v : variances) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidParams, "omega variances must be positive");
  }
}

CatalogModel build_orr_network(const OrrParams& p, double x0) {
  p.validate();
  std::vector<std::string> labels = OrrParams::omega_names();
  labels.insert(labels.end(), {"x", "y1", "y2"});
  std::vector<std::vector<Vertex>> parents(14);
  std::vector<ConditionalDensity> cpds;
  for (std::size_t i = 0; i < 11; ++i) cpds.push_back(LinearGaussianCPD{p.means[i], {}, std::sqrt(p.variances[i])});
  parents[11] = {0, 1, 2};
  cpds.push_back(LinearGaussianCPD{x0, {1.0, 1.0, 1.0}, 0.0});
  parents[12] = {11, 3, 4, 5, 6};
  cpds.push_back(LinearGaussianCPD{p.beta_y1_0, {p.beta_y1_x, 1.0, 1.0, 1.0, 1.0}, 0.0});
  parents[13] = {11, 7, 8, 9, 10};
  cpds.push_back(LinearGaussianCPD{p.beta_y2_0, {p.beta_y2_x, 1.0, 1.0, 1.0, 1.0}, 0.0});
  CatalogModel out{DirectedGraphModel(DirectedGraph(parents, labels), std::move(cpds)), {}};
  out.qois.emplace_back("xstar", QuantityOfInterest(CrossingQoi{12, 13, 11}, "xstar"));
  out.qois.emplace_back("y1", QuantityOfInterest(AffineQoi{12, 1.0, 0.0}, "y1"));
  out.qois.emplace_back("y2", QuantityOfInterest(AffineQoi{13, 1.0, 0.0}, "y2"));
  return out;
}

double orr_conditional_mean(const OrrParams& p, int i, double x0) {
  const double mx = x0 + p.means[0] + p.means[1] + p.means[2];
  if (i == 1) return p.beta_y1_0 + p.beta_y1_x * mx + p.means[3] + p.means[4] + p.means[5] + p.means[6];
  if (i == 2) return p.beta_y2_0 + p.beta_y2_x * mx + p.means[7] + p.means[8] + p.means[9] + p.means[10];
  throw Error(ErrorCode::InvalidArgument, "y index must be 1 or 2");
}

double orr_optimal_binding_energy(const OrrParams& p) {
  const double den = p.beta_y1_x - p.beta_y2_x;
  if (den == 0.0) throw Error(ErrorCode::ParallelLines, "beta_y1_x equals beta_y2_x");
  const double m0 = p.means[0] + p.means[1] + p.means[2];
  const double bar1 = p.beta_y1_x * m0 + p.means[3] + p.means[4] + p.means[5] + p.means[6];
  const double bar2 = p.beta_y2_x * m0 + p.means[7] + p.means[8] + p.means[9] + p.means[10];
  return (p.beta_y2_0 + bar2 - p.beta_y1_0 - bar1) / den;
}

Interval orr_sensitivity_interval(const OrrParams& p, const std::string& name, double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be nonnegative");
  const std::size_t i = p.omega_index(name);
  const double den = p.beta_y1_x - p.beta_y2_x;
  if (den == 0.0) throw Error(ErrorCode::ParallelLines, "beta_y1_x equals beta_y2_x");
  const double root = std::sqrt(2.0 * p.variances[i] * eta);
  const double half = i < 3 ? (std::fabs(p.beta_y1_x) + std::fabs(p.beta_y2_x)) * root / std::fabs(den)
                            : root / std::fabs(den);
  return {-half, half};
}

DirectedGraphModel build_markov_chain(std::vector<ConditionalDensity> cpds, std::vector<std::string> labels) {
  if (cpds.empty()) throw Error(ErrorCode::InvalidChain, "empty chain");
  std::vector<std::vector<Vertex>> parents(cpds.size());
  for (std::size_t i = 0; i < cpds.size(); ++i) {
    const std::size_t want = i == 0 ? 0 : 1;
    if (cpd_parent_count(cpds[i]) != want) {
      throw Error(ErrorCode::InvalidChain, "step " + std::to_string(i + 1) + " must consume " +
                                               std::to_string(want) + " parent(s)");
    }
    if (i > 0) parents[i] = {i - 1};
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < cpds.size(); ++i) labels.push_back("X" + std::to_string(i + 1));
  }
  return DirectedGraphModel(DirectedGraph(std::move(parents), std::move(labels)), std::move(cpds));
}

std::vector<std::string> preset_names() { return {"langmuir-illustrative", "markov-chain", "orr-tableB1"}; }

CatalogModel preset(const std::string& name) {
  if (name == "orr-tableB1") return build_orr_network();
  if (name == "langmuir-illustrative") return build_langmuir_network();
  if (name == "markov-chain") {
    std::vector<ConditionalDensity> cpds = {LinearGaussianCPD{0.0, {}, 1.0}};
    for (int i = 0; i < 3; ++i) cpds.push_back(LinearGaussianCPD{0.0, {0.8}, 0.5});
    CatalogModel out{build_markov_chain(std::move(cpds)), {}};
    out.qois.emplace_back("X4", QuantityOfInterest(AffineQoi{3, 1.0, 0.0}, "X4"));
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset " + name);
}

}  // namespace bnuq
