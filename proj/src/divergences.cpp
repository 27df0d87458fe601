#include "bnuq/divergences.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <memory>
#include <numbers>

#include "bnuq/error.hpp"

namespace bnuq {

double kl_gaussian(double q_mean, double q_sd, double p_mean, double p_sd) {
  if (p_sd == 0.0) throw Error(ErrorCode::DegenerateReference, "reference sd is zero");
  if (!(p_sd > 0.0) || !(q_sd > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "standard deviations must be positive");
  }
  const double d = q_mean - p_mean;
  return std::log(p_sd / q_sd) + (q_sd * q_sd + d * d) / (2.0 * p_sd * p_sd) - 0.5;
}

Density1D normal_density(double mean, double sd) {
  return {[mean, sd](double x) { return normal_pdf(x, mean, sd); }, -INFINITY, INFINITY, {}};
}

Density1D uniform_density(double lo, double hi) {
  const double h = 1.0 / (hi - lo);
  return {[=](double x) { return (x >= lo && x <= hi) ? h : 0.0; }, lo, hi, {lo, hi}};
}

Density1D gamma_density(double shape, double scale) {
  const double norm = -std::lgamma(shape) - shape * std::log(scale);
  return {[=](double x) {
            if (!(x > 0.0)) return 0.0;
            return std::exp((shape - 1.0) * std::log(x) - x / scale + norm);
          },
          0.0, INFINITY, {}};
}

Density1D histogram_density(const HistogramDensity& h) {
  return {[h](double x) { return h.pdf(x); }, h.edges.front(), h.edges.back(), h.edges};
}

Density1D kde_density(const KernelDensity& k) {
  constexpr std::size_t kExactLimit = 4096;
  const auto [mn, mx] = std::minmax_element(k.points.begin(), k.points.end());
  const double lo = *mn - 8.0 * k.bandwidth;
  const double hi = *mx + 8.0 * k.bandwidth;
  if (k.points.size() <= kExactLimit) {
    return {[k](double x) { return k.pdf(x); }, lo, hi, {}};
  }
  // Linear binning onto a regular grid, truncated Gaussian convolution,
  // linear interpolation between grid nodes.
  constexpr std::size_t cells = 1u << 15;
  const double dx = (hi - lo) / static_cast<double>(cells);
  std::vector<double> mass(cells + 1, 0.0);
  for (double x : k.points) {
    const double t = (x - lo) / dx;
    auto i = static_cast<std::size_t>(t);
    if (i >= cells) i = cells - 1;
    const double f = t - static_cast<double>(i);
    mass[i] += 1.0 - f;
    mass[i + 1] += f;
  }
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(8.0 * k.bandwidth / dx));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  const double norm = 1.0 / (static_cast<double>(k.points.size()) * k.bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  for (std::ptrdiff_t j = -half; j <= half; ++j) {
    const double z = static_cast<double>(j) * dx / k.bandwidth;
    kernel[static_cast<std::size_t>(j + half)] = norm * std::exp(-0.5 * z * z);
  }
  auto grid = std::make_shared<std::vector<double>>(cells + 1, 0.0);
  const auto last = static_cast<std::ptrdiff_t>(cells);
  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(last, i + half);
    double s = 0.0;
    for (std::ptrdiff_t j = a; j <= b; ++j) {
      s += mass[static_cast<std::size_t>(j)] * kernel[static_cast<std::size_t>(j - i + half)];
    }
    (*grid)[static_cast<std::size_t>(i)] = s;
  }
  return {[grid, lo, hi, dx](double x) {
            if (!(x >= lo && x <= hi)) return 0.0;
            const double t = (x - lo) / dx;
            auto i = static_cast<std::size_t>(t);
            if (i >= cells) i = cells - 1;
            const double f = t - static_cast<double>(i);
            return (1.0 - f) * (*grid)[i] + f * (*grid)[i + 1];
          },
          lo, hi, {}};
}

QuadratureResult kl_density_quadrature(const Density1D& q, const Density1D& p, Interval support,
                                       std::size_t node_cap) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const double lo = std::max(support.lo, q.lower);
  const double hi = std::min(support.hi, q.upper);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature support must be finite");
  }
  QuadratureResult out;
  if (!(hi > lo)) {
    out.converged = true;
    return out;
  }
  std::vector<double> cuts{lo, hi};
  for (const auto* d : {&q, &p}) {
    for (double b : d->breakpoints) {
      if (b > lo && b < hi) cuts.push_back(b);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  bool saturated = false;
  auto integrand = [&](double x) {
    const double qx = q.pdf(x);
    if (!(qx > 0.0)) return 0.0;
    const double px = p.pdf(x);
    if (!(px > 0.0)) {
      saturated = true;
      return 0.0;
    }
    return qx * std::log(qx / px);
  };
  auto level_sum = [&](std::size_t panels) {
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double width = (cuts[s + 1] - cuts[s]) / static_cast<double>(panels);
      for (std::size_t k = 0; k < panels; ++k) {
        const double a = cuts[s] + width * static_cast<double>(k);
        const double mid = a + 0.5 * width;
        const double r = 0.5 * width;
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          acc += ws[i] * (integrand(mid - r * xs[i]) + integrand(mid + r * xs[i]));
        }
        total += r * acc;
      }
    }
    return total;
  };

  const std::size_t segments = cuts.size() - 1;
  std::size_t panels = 1;
  double prev = level_sum(panels);
  out.nodes = segments * 20;
  for (;;) {
    if (saturated) break;
    panels *= 2;
    const std::size_t nodes = segments * panels * 20;
    if (nodes > node_cap) break;
    const double cur = level_sum(panels);
    out.nodes = nodes;
    const double change = std::fabs(cur - prev);
    out.relative_change = cur != 0.0 ? change / std::fabs(cur) : change;
    prev = cur;
    if (change <= 1e-6 * std::fabs(cur) || change <= 1e-14) {
      out.converged = true;
      break;
    }
  }
  if (saturated) {
    out.saturated = true;
    out.value = INFINITY;
    out.diagnostic = "q has mass where p vanishes";
    return out;
  }
  out.value = prev;
  if (!out.converged) out.diagnostic = "node cap reached before relative change < 1e-6";
  return out;
}

EtaEstimate eta_from_samples(const ConditionalDensity& baseline, std::span<const double> residuals,
                             const DensityModel& model) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyData, "no residuals");
  Density1D p;
  double center = 0.0;
  double spread = 0.0;
  if (const auto* lg = std::get_if<LinearGaussianCPD>(&baseline)) {
    if (lg->noise_sd == 0.0) {
      EtaEstimate e;
      e.eta = INFINITY;
      e.saturated = true;
      e.quadrature.saturated = true;
      e.quadrature.value = INFINITY;
      e.quadrature.diagnostic = "baseline noise is degenerate";
      return e;
    }
    p = normal_density(0.0, lg->noise_sd);
    spread = lg->noise_sd;
  } else if (const auto* an = std::get_if<AdditiveNoiseCPD>(&baseline)) {
    if (const auto* h = std::get_if<HistogramDensity>(&an->noise)) {
      p = histogram_density(*h);
      center = h->mean();
      spread = std::sqrt(h->variance());
    } else if (const auto* k = std::get_if<KernelDensity>(&an->noise)) {
      p = kde_density(*k);
      center = k->mean();
      spread = std::sqrt(k->variance());
    } else {
      throw Error(ErrorCode::UnsupportedCPDFamily, "point-mass noise has no density");
    }
  } else if (const auto* g = std::get_if<GammaCPD>(&baseline)) {
    p = gamma_density(g->shape, g->scale);
    center = g->mean();
    spread = std::sqrt(g->shape) * g->scale;
  } else {
    throw Error(ErrorCode::UnsupportedCPDFamily,
                cpd_kind(baseline) + " CPD has no additive-noise representation");
  }
  Density1D q = model.kind == DensityModelKind::histogram
                    ? histogram_density(fit_histogram(residuals, model.bins))
                    : kde_density(fit_kde(residuals, model.bandwidth));
  const Interval support{center - 10.0 * spread, center + 10.0 * spread};
  EtaEstimate e;
  e.quadrature = kl_density_quadrature(q, p, support);
  e.eta = e.quadrature.value;
  e.saturated = e.quadrature.saturated;
  return e;
}

namespace {

bool same_vertex(const DirectedGraphModel& q, const DirectedGraphModel& p, Vertex v) {
  return q.graph().parents(v) == p.graph().parents(v) && q.cpd(v) == p.cpd(v);
}

struct Affine {
  double c0 = 0.0;
  std::vector<double> w;
};

Affine mean_difference(const DirectedGraphModel& q, const DirectedGraphModel& p, Vertex v) {
  const auto& cq = std::get<LinearGaussianCPD>(q.cpd(v));
  const auto& cp = std::get<LinearGaussianCPD>(p.cpd(v));
  Affine d;
  d.c0 = cq.intercept - cp.intercept;
  d.w.assign(q.size(), 0.0);
  const auto& pq = q.graph().parents(v);
  const auto& pp = p.graph().parents(v);
  for (std::size_t a = 0; a < pq.size(); ++a) d.w[pq[a]] += cq.coefficients[a];
  for (std::size_t b = 0; b < pp.size(); ++b) d.w[pp[b]] -= cp.coefficients[b];
  return d;
}

// Conditional KL of two Gaussians with mean gap d; sd = 0 follows the Dirac convention.
double gaussian_term(double q_sd, double p_sd, double mean_sq, bool& violation) {
  if (p_sd == 0.0) {
    if (q_sd == 0.0 && mean_sq <= 1e-24) return 0.0;
    violation = true;
    return INFINITY;
  }
  if (q_sd == 0.0) {
    violation = true;
    return INFINITY;
  }
  return std::log(p_sd / q_sd) + (q_sd * q_sd + mean_sq) / (2.0 * p_sd * p_sd) - 0.5;
}

void finish(ChainRuleDecomposition& out) {
  out.total = 0.0;
  for (std::size_t v = 0; v < out.terms.size(); ++v) {
    if (out.violation[v]) out.terms[v] = INFINITY;
  }
  out.total = pairwise_sum(out.terms);
}

}  // namespace

ChainRuleDecomposition kl_chain_rule(const DirectedGraphModel& q, const DirectedGraphModel& p,
                                     std::size_t mc_samples, std::uint64_t seed, Exec exec) {
  if (q.size() != p.size()) {
    throw Error(ErrorCode::DimensionMismatch, "models have different vertex counts");
  }
  const std::size_t n = q.size();
  ChainRuleDecomposition out;
  out.terms.assign(n, 0.0);
  out.violation.assign(n, false);

  if (q.is_finite_discrete() && p.is_finite_discrete()) {
    for (Vertex v = 0; v < n; ++v) {
      if (std::get<FiniteDiscreteCPD>(q.cpd(v)).cardinality !=
          std::get<FiniteDiscreteCPD>(p.cpd(v)).cardinality) {
        throw Error(ErrorCode::DimensionMismatch, "state counts differ at vertex " +
                                                      q.graph().label(v));
      }
    }
    const auto joint = enumerate_discrete(q);
    for (Vertex v = 0; v < n; ++v) {
      if (same_vertex(q, p, v)) continue;
      std::vector<double> contrib;
      contrib.reserve(joint.probs.size());
      for (std::size_t s = 0; s < joint.probs.size(); ++s) {
        const double w = joint.probs[s];
        if (w == 0.0) continue;
        const double lq = q.log_density_vertex(v, joint.states[s]);
        const double lp = p.log_density_vertex(v, joint.states[s]);
        if (lp == -INFINITY) {
          out.violation[v] = true;
          break;
        }
        contrib.push_back(w * (lq - lp));
      }
      out.terms[v] = pairwise_sum(contrib);
    }
    out.exact = true;
    out.method = "exact_enumeration";
    finish(out);
    return out;
  }

  if (q.is_linear_gaussian() && p.is_linear_gaussian()) {
    const auto m = gaussian_joint_moments(q);
    for (Vertex v = 0; v < n; ++v) {
      if (same_vertex(q, p, v)) continue;
      const auto d = mean_difference(q, p, v);
      double mean = d.c0;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d.w[i] == 0.0) continue;
        mean += d.w[i] * m.mean[i];
        for (std::size_t j = 0; j < n; ++j) var += d.w[i] * d.w[j] * m.cov(i, j);
      }
      const double q_sd = std::get<LinearGaussianCPD>(q.cpd(v)).noise_sd;
      const double p_sd = std::get<LinearGaussianCPD>(p.cpd(v)).noise_sd;
      bool violation = false;
      out.terms[v] = gaussian_term(q_sd, p_sd, mean * mean + std::max(var, 0.0), violation);
      out.violation[v] = violation;
    }
    out.exact = true;
    out.method = "gaussian_closed_form";
    finish(out);
    return out;
  }

  const auto rows = sample(q, mc_samples, seed, exec);
  std::vector<double> vals(rows.rows);
  for (Vertex v = 0; v < n; ++v) {
    if (same_vertex(q, p, v)) continue;
    const bool both_lg = std::holds_alternative<LinearGaussianCPD>(q.cpd(v)) &&
                         std::holds_alternative<LinearGaussianCPD>(p.cpd(v));
    bool violation = false;
    if (both_lg) {
      const auto d = mean_difference(q, p, v);
      const double q_sd = std::get<LinearGaussianCPD>(q.cpd(v)).noise_sd;
      const double p_sd = std::get<LinearGaussianCPD>(p.cpd(v)).noise_sd;
      for (std::size_t i = 0; i < rows.rows && !violation; ++i) {
        double gap = d.c0;
        const auto r = rows.row(i);
        for (std::size_t j = 0; j < n; ++j) gap += d.w[j] * r[j];
        vals[i] = gaussian_term(q_sd, p_sd, gap * gap, violation);
      }
    } else {
      for (std::size_t i = 0; i < rows.rows && !violation; ++i) {
        const auto r = rows.row(i);
        const double lq = q.log_density_vertex(v, r);
        const double lp = p.log_density_vertex(v, r);
        if (lp == -INFINITY && lq != -INFINITY) violation = true;
        vals[i] = (lq == -INFINITY) ? 0.0 : lq - lp;
      }
    }
    out.violation[v] = violation;
    if (!violation) out.terms[v] = pairwise_sum(vals) / static_cast<double>(rows.rows);
  }
  out.method = "monte_carlo";
  finish(out);
  return out;
}

double eta_solvation_edge(const DirectedGraphModel& p, const DirectedGraphModel& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::StructureMismatch, "vertex counts differ");
  std::vector<Vertex> changed;
  for (Vertex v = 0; v < p.size(); ++v) {
    if (!same_vertex(q, p, v)) changed.push_back(v);
  }
  if (changed.empty()) return 0.0;
  if (changed.size() > 1) throw Error(ErrorCode::MultiVertexDiff, "more than one CPD differs");
  const Vertex v = changed.front();
  for (Vertex a : p.graph().parents(v)) {
    if (!q.graph().has_edge(a, v)) {
      throw Error(ErrorCode::StructureMismatch, "alternative drops a baseline parent");
    }
  }
  if (!q.is_linear_gaussian() || !p.is_linear_gaussian()) {
    throw Error(ErrorCode::NonGaussianModel, "solvation-edge closed form needs linear-Gaussian models");
  }
  const auto d = kl_chain_rule(q, p);
  if (d.violation[v]) {
    throw Error(ErrorCode::AbsoluteContinuityViolation, "alternative not absolutely continuous");
  }
  return d.terms[v];
}

}  // namespace bnuq
