#include "bnuq/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "bnuq/error.hpp"

namespace bnuq {

std::vector<double> SampleMatrix::column(std::size_t j) const {
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, j);
  return out;
}

DirectedGraphModel::DirectedGraphModel(DirectedGraph graph, std::vector<ConditionalDensity> cpds)
    : graph_(std::move(graph)), cpds_(std::move(cpds)) {
  if (cpds_.size() != graph_.vertex_count()) {
    throw Error(ErrorCode::DimensionMismatch, "one CPD per vertex required");
  }
  for (Vertex v = 0; v < cpds_.size(); ++v) {
    validate_cpd(cpds_[v]);
    if (cpd_parent_count(cpds_[v]) != graph_.parents(v).size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "CPD of vertex " + graph_.label(v) + " consumes " +
                      std::to_string(cpd_parent_count(cpds_[v])) + " parents, graph has " +
                      std::to_string(graph_.parents(v).size()));
    }
    if (const auto* d = std::get_if<FiniteDiscreteCPD>(&cpds_[v])) {
      const auto& ps = graph_.parents(v);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto* pd = std::get_if<FiniteDiscreteCPD>(&cpds_[ps[i]]);
        if (pd && pd->cardinality != d->parent_cardinalities[i]) {
          throw Error(ErrorCode::DimensionMismatch,
                      "parent cardinality mismatch at vertex " + graph_.label(v));
        }
      }
    }
  }
  order_ = topological_order(graph_);
}

const ConditionalDensity& DirectedGraphModel::cpd(Vertex v) const {
  graph_.check_vertex(v);
  return cpds_[v];
}

bool DirectedGraphModel::is_linear_gaussian() const {
  return std::all_of(cpds_.begin(), cpds_.end(), [](const ConditionalDensity& c) {
    return std::holds_alternative<LinearGaussianCPD>(c);
  });
}

bool DirectedGraphModel::is_finite_discrete() const {
  return std::all_of(cpds_.begin(), cpds_.end(), [](const ConditionalDensity& c) {
    return std::holds_alternative<FiniteDiscreteCPD>(c);
  });
}

DirectedGraphModel DirectedGraphModel::with_cpd(Vertex v, ConditionalDensity cpd) const {
  auto cpds = cpds_;
  graph_.check_vertex(v);
  cpds[v] = std::move(cpd);
  return DirectedGraphModel(graph_, std::move(cpds));
}

namespace {

template <class F>
auto with_parent_values(const DirectedGraph& g, Vertex v, std::span<const double> row, F&& f) {
  const auto& ps = g.parents(v);
  double buf[32];
  std::vector<double> heap;
  double* vals = buf;
  if (ps.size() > 32) {
    heap.resize(ps.size());
    vals = heap.data();
  }
  for (std::size_t i = 0; i < ps.size(); ++i) vals[i] = row[ps[i]];
  return f(std::span<const double>(vals, ps.size()));
}

}  // namespace

double DirectedGraphModel::sample_vertex(Vertex v, std::span<const double> row, Engine& rng) const {
  return with_parent_values(graph_, v, row,
                            [&](std::span<const double> p) { return cpd_sample(cpds_[v], p, rng); });
}

double DirectedGraphModel::log_density_vertex(Vertex v, std::span<const double> row) const {
  return with_parent_values(graph_, v, row, [&](std::span<const double> p) {
    return cpd_log_density(cpds_[v], row[v], p);
  });
}

double joint_log_density(const DirectedGraphModel& model, std::span<const double> x) {
  if (x.size() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch, "assignment has " + std::to_string(x.size()) +
                                                  " entries, model has " +
                                                  std::to_string(model.size()));
  }
  double s = 0.0;
  for (Vertex v = 0; v < model.size(); ++v) {
    const double l = model.log_density_vertex(v, x);
    if (l == -INFINITY) return -INFINITY;
    s += l;
  }
  return s;
}

SampleMatrix sample(const DirectedGraphModel& model, std::size_t n, std::uint64_t seed, Exec exec) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  SampleMatrix out(n, model.size());
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  const auto& order = model.order();
  for_each_index(blocks, exec, [&](std::size_t b) {
    Engine rng = make_engine(seed, b);
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      auto row = out.row(i);
      for (Vertex v : order) row[v] = model.sample_vertex(v, row, rng);
    }
  });
  return out;
}

void sample_subset(const DirectedGraphModel& model, std::span<const Vertex> topo_vertices,
                   std::span<double> row, Engine& rng) {
  for (Vertex v : topo_vertices) row[v] = model.sample_vertex(v, row, rng);
}

std::optional<GaussianJointMoments> linear_joint_moments(const DirectedGraphModel& model) {
  const std::size_t n = model.size();
  std::vector<LinearForm> forms;
  forms.reserve(n);
  for (Vertex v = 0; v < n; ++v) {
    auto f = linear_form(model.cpd(v));
    if (!f) return std::nullopt;
    forms.push_back(std::move(*f));
  }
  GaussianJointMoments m;
  m.n = n;
  m.mean.assign(n, 0.0);
  m.covariance.assign(n * n, 0.0);
  std::vector<Vertex> done;
  for (Vertex i : model.order()) {
    const auto& ps = model.graph().parents(i);
    const auto& f = forms[i];
    double mu = f.intercept + f.noise_mean;
    for (std::size_t a = 0; a < ps.size(); ++a) mu += f.coefficients[a] * m.mean[ps[a]];
    m.mean[i] = mu;
    for (Vertex j : done) {
      double c = 0.0;
      for (std::size_t a = 0; a < ps.size(); ++a) c += f.coefficients[a] * m.cov(ps[a], j);
      m.covariance[i * n + j] = c;
      m.covariance[j * n + i] = c;
    }
    double var = f.noise_variance;
    for (std::size_t a = 0; a < ps.size(); ++a) {
      for (std::size_t b = 0; b < ps.size(); ++b) {
        var += f.coefficients[a] * f.coefficients[b] * m.cov(ps[a], ps[b]);
      }
    }
    m.covariance[i * n + i] = var;
    done.push_back(i);
  }
  return m;
}

GaussianJointMoments gaussian_joint_moments(const DirectedGraphModel& model) {
  if (!model.is_linear_gaussian()) {
    throw Error(ErrorCode::NonGaussianModel, "joint moments need linear-Gaussian CPDs");
  }
  return *linear_joint_moments(model);
}

DirectedGraphModel fit_linear_gaussian_mle(const SampleMatrix& data, const DirectedGraph& graph) {
  if (data.cols != graph.vertex_count()) {
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.cols) +
                                                  " columns, graph has " +
                                                  std::to_string(graph.vertex_count()) + " vertices");
  }
  std::vector<ConditionalDensity> cpds;
  for (Vertex v = 0; v < graph.vertex_count(); ++v) {
    const auto& ps = graph.parents(v);
    const std::size_t p = ps.size();
    if (data.rows < p + 2) {
      throw Error(ErrorCode::InsufficientData, "vertex " + graph.label(v) + " needs at least " +
                                                   std::to_string(p + 2) + " rows");
    }
    Eigen::MatrixXd x(data.rows, p + 1);
    Eigen::VectorXd y(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
      x(i, 0) = 1.0;
      for (std::size_t a = 0; a < p; ++a) x(i, a + 1) = data.at(i, ps[a]);
      y(i) = data.at(i, v);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < p + 1) {
      throw Error(ErrorCode::RankDeficientDesign,
                  "collinear design for vertex " + graph.label(v));
    }
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd r = y - x * beta;
    LinearGaussianCPD c;
    c.intercept = beta(0);
    for (std::size_t a = 0; a < p; ++a) c.coefficients.push_back(beta(a + 1));
    c.noise_sd = std::sqrt(r.squaredNorm() / static_cast<double>(data.rows));
    cpds.emplace_back(std::move(c));
  }
  return DirectedGraphModel(graph, std::move(cpds));
}

DiscreteJoint enumerate_discrete(const DirectedGraphModel& model, std::size_t max_states) {
  if (!model.is_finite_discrete()) {
    throw Error(ErrorCode::UnsupportedFamily, "exact enumeration needs finite-discrete CPDs");
  }
  DiscreteJoint j;
  std::size_t total = 1;
  for (Vertex v = 0; v < model.size(); ++v) {
    const auto c = std::get<FiniteDiscreteCPD>(model.cpd(v)).cardinality;
    j.cardinalities.push_back(c);
    if (total > max_states / c) {
      throw Error(ErrorCode::UnsupportedFamily, "discrete state space too large to enumerate");
    }
    total *= c;
  }
  std::vector<double> x(model.size(), 0.0);
  j.states.reserve(total);
  j.probs.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t v = model.size(); v-- > 0;) {
      x[v] = static_cast<double>(rest % j.cardinalities[v]);
      rest /= j.cardinalities[v];
    }
    j.states.push_back(x);
    j.probs.push_back(std::exp(joint_log_density(model, x)));
  }
  return j;
}

}  // namespace bnuq
