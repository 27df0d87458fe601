#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace bnuq::testing {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

DirectedGraph random_dag(Rng& rng, std::size_t n, double edge_p) {
  std::vector<std::vector<Vertex>> parents(n);
  std::bernoulli_distribution edge(edge_p);
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex p = 0; p < v; ++p) {
      if (edge(rng)) parents[v].push_back(p);
    }
  }
  return DirectedGraph(std::move(parents));
}

DirectedGraphModel random_linear_gaussian_on(Rng& rng, const DirectedGraph& g) {
  std::vector<ConditionalDensity> cpds;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    LinearGaussianCPD c;
    c.intercept = uniform(rng, -1.0, 1.0);
    for (std::size_t i = 0; i < g.parents(v).size(); ++i) c.coefficients.push_back(uniform(rng, -1.0, 1.0));
    c.noise_sd = uniform(rng, 0.3, 1.5);
    cpds.push_back(c);
  }
  return DirectedGraphModel(g, std::move(cpds));
}

DirectedGraphModel random_linear_gaussian(Rng& rng, std::size_t n, double edge_p) {
  return random_linear_gaussian_on(rng, random_dag(rng, n, edge_p));
}

DirectedGraphModel random_binary_network(Rng& rng, const DirectedGraph& g) {
  std::vector<ConditionalDensity> cpds;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    FiniteDiscreteCPD c;
    c.cardinality = 2;
    c.parent_cardinalities.assign(g.parents(v).size(), 2);
    for (std::size_t r = 0; r < (std::size_t{1} << g.parents(v).size()); ++r) {
      const double p = uniform(rng, 0.05, 0.95);
      c.table.push_back(p);
      c.table.push_back(1.0 - p);
    }
    cpds.push_back(c);
  }
  return DirectedGraphModel(g, std::move(cpds));
}

std::vector<DirectedGraph> all_dags(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (Vertex a = 0; a < n; ++a) {
    for (Vertex b = 0; b < n; ++b) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  std::vector<DirectedGraph> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << pairs.size()); ++mask) {
    std::vector<std::vector<Vertex>> parents(n);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (mask >> i & 1) parents[pairs[i].second].push_back(pairs[i].first);
    }
    // Acyclic iff repeatedly removing parentless vertices empties the graph.
    std::vector<char> gone(n, 0);
    bool progress = true;
    std::size_t removed = 0;
    while (progress) {
      progress = false;
      for (Vertex v = 0; v < n; ++v) {
        if (gone[v]) continue;
        const bool free = std::all_of(parents[v].begin(), parents[v].end(), [&](Vertex p) { return gone[p]; });
        if (free) {
          gone[v] = 1;
          ++removed;
          progress = true;
        }
      }
    }
    if (removed != n) continue;
    for (auto& ps : parents) std::sort(ps.begin(), ps.end());
    out.emplace_back(std::move(parents));
  }
  return out;
}

GaussianOracle gaussian_oracle(const DirectedGraphModel& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b0(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Vertex v = 0; v < m.size(); ++v) {
    const auto& c = std::get<LinearGaussianCPD>(m.cpd(v));
    const auto& ps = m.graph().parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) b(v, ps[i]) = c.coefficients[i];
    b0(v) = c.intercept;
    d(v, v) = c.noise_sd * c.noise_sd;
  }
  const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - b).inverse();
  return {inv * b0, inv * d * inv.transpose()};
}

double gaussian_kl_oracle(const GaussianOracle& q, const GaussianOracle& p) {
  const auto n = static_cast<double>(q.mean.size());
  const Eigen::LLT<Eigen::MatrixXd> lp(p.cov), lq(q.cov);
  const Eigen::VectorXd dm = p.mean - q.mean;
  const double trace = lp.solve(q.cov).trace();
  const double quad = dm.dot(lp.solve(dm));
  const double logdet_p = 2.0 * Eigen::MatrixXd(lp.matrixL()).diagonal().array().log().sum();
  const double logdet_q = 2.0 * Eigen::MatrixXd(lq.matrixL()).diagonal().array().log().sum();
  return 0.5 * (trace + quad - n + logdet_p - logdet_q);
}

JointOracle discrete_joint_oracle(const DirectedGraphModel& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> card(n);
  std::size_t total = 1;
  for (Vertex v = 0; v < n; ++v) {
    card[v] = std::get<FiniteDiscreteCPD>(m.cpd(v)).cardinality;
    total *= card[v];
  }
  JointOracle out;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<double> x(n);
    std::size_t rest = code;
    for (Vertex v = 0; v < n; ++v) {
      x[v] = static_cast<double>(rest % card[v]);
      rest /= card[v];
    }
    double p = 1.0;
    for (Vertex v = 0; v < n; ++v) {
      const auto& c = std::get<FiniteDiscreteCPD>(m.cpd(v));
      std::size_t row = 0;
      for (Vertex par : m.graph().parents(v)) row = row * card[par] + static_cast<std::size_t>(x[par]);
      p *= c.table[row * c.cardinality + static_cast<std::size_t>(x[v])];
    }
    out.states.push_back(std::move(x));
    out.probs.push_back(p);
  }
  return out;
}

namespace {

double kl(const std::vector<double>& q, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) s += q[i] * std::log(q[i] / p[i]);
  }
  return s;
}

// Largest t in [lo, hi] with g(t) <= eta, for g convex with g(lo) <= eta.
template <class G>
double upper_feasible(G g, double lo, double hi, double eta) {
  if (g(hi) <= eta) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= eta ? lo : hi) = mid;
  }
  return lo;
}

// Best objective with mass `q_low` on the lowest value, or -inf if infeasible.
double best_given_low(const std::vector<double>& v, const std::vector<double>& p, double q_low, double eta) {
  const double r = 1.0 - q_low;
  const auto law = [&](double s) { return std::vector<double>{q_low, r - s, s}; };
  const auto g = [&](double s) { return kl(law(s), p); };
  // KL along the segment is convex; its minimizer splits mass in proportion to p.
  const double s_min = r * p[2] / (p[1] + p[2]);
  if (g(s_min) > eta) return -INFINITY;
  const double s = upper_feasible(g, s_min, r, eta);
  const auto q = law(s);
  return q[0] * v[0] + q[1] * v[1] + q[2] * v[2];
}

double simplex_max(std::vector<double> v, std::vector<double> p, double eta) {
  double mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) mean += p[i] * v[i];
  if (v.size() == 1) return 0.0;
  if (v.size() == 2) {
    constexpr int kGrid = 100000;
    double best = -INFINITY;
    int best_i = 0;
    for (int i = 0; i <= kGrid; ++i) {
      const double q = static_cast<double>(i) / kGrid;
      if (kl({1.0 - q, q}, p) <= eta && (1.0 - q) * v[0] + q * v[1] > best) {
        best = (1.0 - q) * v[0] + q * v[1];
        best_i = i;
      }
    }
    const double lo = static_cast<double>(best_i) / kGrid;
    const double q = upper_feasible([&](double t) { return kl({1.0 - t, t}, p); }, lo,
                                    std::min(1.0, lo + 1.0 / kGrid), eta);
    return (1.0 - q) * v[0] + q * v[1] - mean;
  }
  constexpr int kGrid = 2000;
  double best = -INFINITY, best_q = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double q = static_cast<double>(i) / kGrid;
    const double val = best_given_low(v, p, q, eta);
    if (val > best) {
      best = val;
      best_q = q;
    }
  }
  // The value function is concave in the low mass; golden section around the grid optimum.
  double a = std::max(0.0, best_q - 1.0 / kGrid), b = std::min(1.0, best_q + 1.0 / kGrid);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (best_given_low(v, p, x1, eta) > best_given_low(v, p, x2, eta)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  best = std::max(best, best_given_low(v, p, 0.5 * (a + b), eta));
  return best - mean;
}

}  // namespace

SimplexBound simplex_search(const std::vector<double>& values, const std::vector<double>& probs, double eta) {
  std::map<double, double> law;
  for (std::size_t i = 0; i < values.size(); ++i) law[values[i]] += probs[i];
  std::vector<double> v, p;
  for (const auto& [x, w] : law) {
    if (w > 0.0) {
      v.push_back(x);
      p.push_back(w);
    }
  }
  std::vector<double> nv(v.rbegin(), v.rend()), np(p.rbegin(), p.rend());
  for (double& x : nv) x = -x;
  return {simplex_max(v, p, eta), -simplex_max(nv, np, eta)};
}

std::pair<double, double> langmuir_ode_steady_state(double k_h2, double k_o2, double p_h2, double p_o2) {
  using State = std::array<double, 2>;
  const double ah = k_h2 * p_h2, ao = k_o2 * p_o2;
  const auto rhs = [&](const State& c) {
    const double free = 1.0 - c[0] - c[1];
    return State{ah * free * free - c[0] * c[0], ao * free * free - c[1] * c[1]};
  };
  // The fastest rate scales with the larger adsorption constant.
  const double dt = 0.05 / (1.0 + std::sqrt(std::max(ah, ao)));
  State c{0.0, 0.0};
  for (long step = 0; step < 100000000; ++step) {
    const auto k1 = rhs(c);
    const auto k2 = rhs({c[0] + 0.5 * dt * k1[0], c[1] + 0.5 * dt * k1[1]});
    const auto k3 = rhs({c[0] + 0.5 * dt * k2[0], c[1] + 0.5 * dt * k2[1]});
    const auto k4 = rhs({c[0] + dt * k3[0], c[1] + dt * k3[1]});
    const State next{c[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                     c[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
    const bool still = next == c;
    c = next;
    if (still) break;
  }
  return {c[0], c[1]};
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace bnuq::testing
