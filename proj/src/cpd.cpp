#include "bnuq/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "bnuq/error.hpp"

namespace bnuq {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool dirac_match(double x, double mean) {
  return std::fabs(x - mean) <= 1e-12 * std::max(1.0, std::fabs(mean));
}

double dot(const std::vector<double>& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double uniform01(Engine& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t categorical(std::span<const double> probs, Engine& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the total; return the last state with mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

double noise_log_density(const NoiseDensity& noise, double e) {
  return std::visit(Overloaded{
                        [&](const HistogramDensity& h) { return std::log(h.pdf(e)); },
                        [&](const KernelDensity& k) { return std::log(k.pdf(e)); },
                        [&](const PointMassDensity& p) { return std::log(p.mass(e)); },
                    },
                    noise);
}

double noise_sample(const NoiseDensity& noise, Engine& rng) {
  return std::visit(
      Overloaded{
          [&](const HistogramDensity& h) {
            std::vector<double> probs(h.counts.size());
            for (std::size_t k = 0; k < probs.size(); ++k) {
              probs[k] = static_cast<double>(h.counts[k]) / static_cast<double>(h.total);
            }
            const std::size_t k = categorical(probs, rng);
            return h.edges[k] + uniform01(rng) * (h.edges[k + 1] - h.edges[k]);
          },
          [&](const KernelDensity& k) {
            const auto i = std::uniform_int_distribution<std::size_t>(0, k.points.size() - 1)(rng);
            return k.points[i] + k.bandwidth * std::normal_distribution<double>(0.0, 1.0)(rng);
          },
          [&](const PointMassDensity& p) { return p.points[categorical(p.probs, rng)]; },
      },
      noise);
}

std::pair<double, double> noise_moments(const NoiseDensity& noise) {
  return std::visit([](const auto& d) { return std::pair{d.mean(), d.variance()}; }, noise);
}

void check_parents(std::size_t expected, std::span<const double> parents) {
  if (parents.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, "CPD expects " + std::to_string(expected) +
                                                  " parent values, got " +
                                                  std::to_string(parents.size()));
  }
}

}  // namespace

double normal_log_pdf(double x, double mean, double sd) {
  if (sd == 0.0) return dirac_match(x, mean) ? 0.0 : -std::numeric_limits<double>::infinity();
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

GammaCPD GammaCPD::from_mean_offset(double x, double y) {
  if (!(x > 0.0) || x == y) {
    throw Error(ErrorCode::InvalidParams, "gamma construction needs x > 0 and x != y");
  }
  const double d = x - y;
  return GammaCPD{x * x / (d * d), d * d / x};
}

DeterministicCPD DeterministicCPD::bind(Expression expression,
                                        const std::vector<std::string>& parent_names) {
  DeterministicCPD cpd;
  cpd.parent_count = parent_names.size();
  for (const auto& var : expression.variables()) {
    auto it = std::find(parent_names.begin(), parent_names.end(), var);
    if (it == parent_names.end()) {
      throw Error(ErrorCode::UnresolvedParent,
                  "expression variable '" + var + "' is not a declared parent");
    }
    cpd.slot_parent.push_back(static_cast<std::size_t>(it - parent_names.begin()));
  }
  cpd.expression = std::move(expression);
  return cpd;
}

double DeterministicCPD::value(std::span<const double> parents) const {
  double buf[16];
  std::vector<double> heap;
  double* vals = buf;
  if (slot_parent.size() > 16) {
    heap.resize(slot_parent.size());
    vals = heap.data();
  }
  for (std::size_t i = 0; i < slot_parent.size(); ++i) vals[i] = parents[slot_parent[i]];
  return expression.evaluate(std::span<const double>(vals, slot_parent.size()));
}

double HistogramDensity::pdf(double x) const {
  if (edges.size() < 2 || !(x >= edges.front()) || !(x <= edges.back())) return 0.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::size_t k = static_cast<std::size_t>(it - edges.begin());
  k = k == 0 ? 0 : k - 1;
  if (k >= counts.size()) k = counts.size() - 1;
  const double width = edges[k + 1] - edges[k];
  return static_cast<double>(counts[k]) / (static_cast<double>(total) * width);
}

double HistogramDensity::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    m += static_cast<double>(counts[k]) * 0.5 * (edges[k] + edges[k + 1]);
  }
  return m / static_cast<double>(total);
}

double HistogramDensity::variance() const {
  double s = 0.0;
  const double m = mean();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double w = edges[k + 1] - edges[k];
    const double mid = 0.5 * (edges[k] + edges[k + 1]) - m;
    s += static_cast<double>(counts[k]) * (mid * mid + w * w / 12.0);
  }
  return s / static_cast<double>(total);
}

double KernelDensity::pdf(double x) const {
  double s = 0.0;
  for (double p : points) {
    const double z = (x - p) / bandwidth;
    s += std::exp(-0.5 * z * z);
  }
  return s / (static_cast<double>(points.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

double KernelDensity::mean() const {
  return std::accumulate(points.begin(), points.end(), 0.0) / static_cast<double>(points.size());
}

double KernelDensity::variance() const {
  const double m = mean();
  double s = 0.0;
  for (double p : points) s += (p - m) * (p - m);
  return s / static_cast<double>(points.size()) + bandwidth * bandwidth;
}

double PointMassDensity::mass(double x) const {
  double m = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (dirac_match(x, points[i])) m += probs[i];
  }
  return m;
}

double PointMassDensity::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) m += probs[i] * points[i];
  return m;
}

double PointMassDensity::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += probs[i] * (points[i] - m) * (points[i] - m);
  return s;
}

std::size_t FiniteDiscreteCPD::rows() const {
  std::size_t r = 1;
  for (std::size_t c : parent_cardinalities) r *= c;
  return r;
}

std::size_t FiniteDiscreteCPD::row_index(std::span<const double> parents) const {
  check_parents(parent_cardinalities.size(), parents);
  std::size_t row = 0;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const double v = parents[i];
    const auto s = static_cast<std::size_t>(v);
    if (v < 0.0 || static_cast<double>(s) != v || s >= parent_cardinalities[i]) {
      throw Error(ErrorCode::InvalidData, "parent value is not a valid discrete state");
    }
    row = row * parent_cardinalities[i] + s;
  }
  return row;
}

void FiniteDiscreteCPD::validate() const {
  if (cardinality == 0) throw Error(ErrorCode::InvalidParams, "discrete CPD needs states");
  if (table.size() != rows() * cardinality) {
    throw Error(ErrorCode::DimensionMismatch, "discrete table has wrong size");
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < cardinality; ++k) {
      const double p = prob(k, r);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidParams, "discrete probability outside [0,1]");
      }
      s += p;
    }
    if (std::fabs(s - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidParams, "discrete table row " + std::to_string(r) +
                                                " does not sum to 1");
    }
  }
}

std::string cpd_kind(const ConditionalDensity& cpd) {
  return std::visit(Overloaded{
                        [](const LinearGaussianCPD&) -> std::string { return "linear_gaussian"; },
                        [](const GammaCPD&) -> std::string { return "gamma"; },
                        [](const DeterministicCPD&) -> std::string { return "deterministic"; },
                        [](const AdditiveNoiseCPD& a) -> std::string {
                          switch (a.noise.index()) {
                            case 0: return "histogram";
                            case 1: return "kde";
                            default: return "point_mass";
                          }
                        },
                        [](const FiniteDiscreteCPD&) -> std::string { return "discrete"; },
                    },
                    cpd);
}

std::size_t cpd_parent_count(const ConditionalDensity& cpd) {
  return std::visit(Overloaded{
                        [](const LinearGaussianCPD& c) { return c.coefficients.size(); },
                        [](const GammaCPD&) { return std::size_t{0}; },
                        [](const DeterministicCPD& c) { return c.parent_count; },
                        [](const AdditiveNoiseCPD& c) { return c.coefficients.size(); },
                        [](const FiniteDiscreteCPD& c) { return c.parent_cardinalities.size(); },
                    },
                    cpd);
}

bool cpd_is_deterministic(const ConditionalDensity& cpd) {
  if (std::holds_alternative<DeterministicCPD>(cpd)) return true;
  if (const auto* lg = std::get_if<LinearGaussianCPD>(&cpd)) return lg->noise_sd == 0.0;
  return false;
}

void validate_cpd(const ConditionalDensity& cpd) {
  std::visit(
      Overloaded{
          [](const LinearGaussianCPD& c) {
            if (!(c.noise_sd >= 0.0) || !std::isfinite(c.noise_sd)) {
              throw Error(ErrorCode::InvalidParams, "noise sd must be finite and >= 0");
            }
          },
          [](const GammaCPD& c) {
            if (!(c.shape > 0.0) || !(c.scale > 0.0)) {
              throw Error(ErrorCode::InvalidParams, "gamma shape and scale must be > 0");
            }
          },
          [](const DeterministicCPD& c) {
            if (c.expression.empty()) throw Error(ErrorCode::InvalidParams, "empty expression");
          },
          [](const AdditiveNoiseCPD& c) {
            std::visit(Overloaded{
                           [](const HistogramDensity& h) {
                             if (h.edges.size() < 2 || h.counts.size() + 1 != h.edges.size()) {
                               throw Error(ErrorCode::InvalidParams, "histogram shape mismatch");
                             }
                             for (std::size_t i = 1; i < h.edges.size(); ++i) {
                               if (!(h.edges[i] > h.edges[i - 1])) {
                                 throw Error(ErrorCode::InvalidParams,
                                             "histogram edges must increase strictly");
                               }
                             }
                             std::uint64_t s = 0;
                             for (auto n : h.counts) s += n;
                             if (s == 0 || s != h.total) {
                               throw Error(ErrorCode::InvalidParams, "histogram total mismatch");
                             }
                           },
                           [](const KernelDensity& k) {
                             if (k.points.empty()) throw Error(ErrorCode::EmptyData, "KDE without points");
                             if (!(k.bandwidth > 0.0)) {
                               throw Error(ErrorCode::NonpositiveBandwidth, "KDE bandwidth must be > 0");
                             }
                           },
                           [](const PointMassDensity& p) {
                             if (p.points.empty() || p.points.size() != p.probs.size()) {
                               throw Error(ErrorCode::InvalidParams, "point-mass shape mismatch");
                             }
                             double s = 0.0;
                             for (double q : p.probs) {
                               if (!(q >= 0.0)) throw Error(ErrorCode::InvalidParams, "negative mass");
                               s += q;
                             }
                             if (std::fabs(s - 1.0) > 1e-12) {
                               throw Error(ErrorCode::InvalidParams, "point masses must sum to 1");
                             }
                           },
                       },
                       c.noise);
          },
          [](const FiniteDiscreteCPD& c) { c.validate(); },
      },
      cpd);
}

double cpd_log_density(const ConditionalDensity& cpd, double x, std::span<const double> parents) {
  check_parents(cpd_parent_count(cpd), parents);
  return std::visit(
      Overloaded{
          [&](const LinearGaussianCPD& c) {
            return normal_log_pdf(x, c.intercept + dot(c.coefficients, parents), c.noise_sd);
          },
          [&](const GammaCPD& c) {
            if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
            return (c.shape - 1.0) * std::log(x) - x / c.scale - std::lgamma(c.shape) -
                   c.shape * std::log(c.scale);
          },
          [&](const DeterministicCPD& c) { return dirac_match(x, c.value(parents)) ? 0.0 : -std::numeric_limits<double>::infinity(); },
          [&](const AdditiveNoiseCPD& c) {
            return noise_log_density(c.noise, x - c.intercept - dot(c.coefficients, parents));
          },
          [&](const FiniteDiscreteCPD& c) {
            const auto s = static_cast<std::size_t>(x);
            if (x < 0.0 || static_cast<double>(s) != x || s >= c.cardinality) return -std::numeric_limits<double>::infinity();
            return std::log(c.prob(s, c.row_index(parents)));
          },
      },
      cpd);
}

double cpd_sample(const ConditionalDensity& cpd, std::span<const double> parents, Engine& rng) {
  return std::visit(
      Overloaded{
          [&](const LinearGaussianCPD& c) {
            const double mean = c.intercept + dot(c.coefficients, parents);
            if (c.noise_sd == 0.0) return mean;
            return mean + c.noise_sd * std::normal_distribution<double>(0.0, 1.0)(rng);
          },
          [&](const GammaCPD& c) { return std::gamma_distribution<double>(c.shape, c.scale)(rng); },
          [&](const DeterministicCPD& c) { return c.value(parents); },
          [&](const AdditiveNoiseCPD& c) {
            return c.intercept + dot(c.coefficients, parents) + noise_sample(c.noise, rng);
          },
          [&](const FiniteDiscreteCPD& c) {
            const std::size_t row = c.row_index(parents);
            return static_cast<double>(categorical(
                std::span<const double>(c.table.data() + row * c.cardinality, c.cardinality), rng));
          },
      },
      cpd);
}

std::optional<LinearForm> linear_form(const ConditionalDensity& cpd) {
  if (const auto* lg = std::get_if<LinearGaussianCPD>(&cpd)) {
    return LinearForm{lg->intercept, lg->coefficients, 0.0, lg->noise_sd * lg->noise_sd, true};
  }
  if (const auto* an = std::get_if<AdditiveNoiseCPD>(&cpd)) {
    const auto [m, v] = noise_moments(an->noise);
    return LinearForm{an->intercept, an->coefficients, m, v, false};
  }
  if (const auto* g = std::get_if<GammaCPD>(&cpd)) {
    return LinearForm{0.0, {}, g->mean(), g->shape * g->scale * g->scale, false};
  }
  return std::nullopt;
}

HistogramDensity fit_histogram(std::span<const double> residuals, std::size_t bin_count) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyData, "histogram needs data");
  if (bin_count == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(residuals.begin(), residuals.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) {
    const double eps = 1e-9 * std::max(1.0, std::fabs(lo));
    lo -= eps;
    hi += eps;
  }
  HistogramDensity h;
  h.edges.resize(bin_count + 1);
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (std::size_t k = 0; k <= bin_count; ++k) h.edges[k] = lo + width * static_cast<double>(k);
  h.edges.back() = hi;
  h.counts.assign(bin_count, 0);
  for (double x : residuals) {
    auto k = static_cast<std::size_t>(std::floor((x - lo) / width));
    if (k >= bin_count) k = bin_count - 1;
    ++h.counts[k];
  }
  h.total = residuals.size();
  return h;
}

double silverman_bandwidth(std::span<const double> residuals) {
  const double n = static_cast<double>(residuals.size());
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : residuals) ss += (x - mean) * (x - mean);
  const double sd = residuals.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return 1.06 * sd * std::pow(n, -0.2);
}

KernelDensity fit_kde(std::span<const double> residuals, std::optional<double> bandwidth) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyData, "KDE needs data");
  double h = bandwidth ? *bandwidth : silverman_bandwidth(residuals);
  if (bandwidth && !(h > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be > 0");
  if (!(h > 0.0)) {
    throw Error(ErrorCode::NonpositiveBandwidth,
                "Silverman bandwidth is zero for constant data; pass a bandwidth");
  }
  return KernelDensity{std::vector<double>(residuals.begin(), residuals.end()), h};
}

}  // namespace bnuq
