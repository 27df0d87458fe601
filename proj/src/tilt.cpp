#include "bnuq/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bnuq/error.hpp"

namespace bnuq {

struct CgfHandle::Impl {
  virtual ~Impl() = default;
  virtual CgfKind kind() const = 0;
  // Base (unsigned) CGF at c inside the open domain.
  virtual CgfValue at(double c) const = 0;
  virtual double d_minus() const { return -INFINITY; }
  virtual double d_plus() const { return INFINITY; }
  virtual std::optional<CgfValue> at_boundary(bool /*upper*/) const { return std::nullopt; }
  // (ess sup, mass) for upper, (ess inf, mass) for lower.
  virtual std::optional<std::pair<double, double>> atom(bool /*upper*/) const { return std::nullopt; }
  virtual std::size_t samples() const { return 0; }
};

namespace {

struct GaussianImpl final : CgfHandle::Impl {
  double v;
  explicit GaussianImpl(double variance) : v(variance) {}
  CgfKind kind() const override { return CgfKind::closed_form; }
  CgfValue at(double c) const override { return {0.5 * c * c * v, c * v, v}; }
};

struct GammaImpl final : CgfHandle::Impl {
  double a, b;
  GammaImpl(double shape, double scale) : a(shape), b(scale) {}
  CgfKind kind() const override { return CgfKind::closed_form; }
  CgfValue at(double c) const override {
    const double u = 1.0 - b * c;
    return {-a * std::log1p(-b * c) - a * b * c, a * b / u - a * b, a * b * b / (u * u)};
  }
  double d_plus() const override { return 1.0 / b; }
  std::optional<std::pair<double, double>> atom(bool upper) const override {
    if (upper) return std::nullopt;
    return std::pair{-a * b, 0.0};
  }
};

struct DiscreteImpl final : CgfHandle::Impl {
  std::vector<double> v, p;
  DiscreteImpl(std::vector<double> values, std::vector<double> probs)
      : v(std::move(values)), p(std::move(probs)) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += p[i] * v[i];
    for (double& x : v) x -= m;
  }
  CgfKind kind() const override { return CgfKind::discrete; }
  CgfValue at(double c) const override {
    double m = -INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (p[i] > 0.0) m = std::max(m, c * v[i]);
    }
    double s = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(p[i] > 0.0)) continue;
      const double w = p[i] * std::exp(c * v[i] - m);
      s += w;
      s1 += w * v[i];
      s2 += w * v[i] * v[i];
    }
    const double mean = s1 / s;
    return {m + std::log(s), mean, std::max(0.0, s2 / s - mean * mean)};
  }
  std::optional<std::pair<double, double>> atom(bool upper) const override {
    double best = upper ? -INFINITY : INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (p[i] > 0.0) best = upper ? std::max(best, v[i]) : std::min(best, v[i]);
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (p[i] > 0.0 && v[i] == best) mass += p[i];
    }
    return std::pair{best, mass};
  }
};

// Components with log-weights lw_i, tilted means m_i and variances v_i at c.
CgfValue combine_components(const std::vector<double>& lw, const std::vector<double>& m,
                            const std::vector<double>& v) {
  const double top = *std::max_element(lw.begin(), lw.end());
  double s = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double w = std::exp(lw[i] - top);
    s += w;
    s1 += w * m[i];
    s2 += w * (v[i] + m[i] * m[i]);
  }
  const double mean = s1 / s;
  return {top + std::log(s), mean, std::max(0.0, s2 / s - mean * mean)};
}

struct GaussianMixtureImpl final : CgfHandle::Impl {
  std::vector<double> mu, logw;
  double var;
  GaussianMixtureImpl(std::vector<double> means, double variance, const std::vector<double>& weights)
      : mu(std::move(means)), var(variance) {
    double m = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) m += weights[i] * mu[i];
    for (double& x : mu) x -= m;
    for (double w : weights) logw.push_back(std::log(w));
  }
  CgfKind kind() const override { return CgfKind::closed_form; }
  CgfValue at(double c) const override {
    std::vector<double> lw(mu.size()), m(mu.size()), v(mu.size(), var);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      lw[i] = logw[i] + c * mu[i] + 0.5 * c * c * var;
      m[i] = mu[i] + c * var;
    }
    return combine_components(lw, m, v);
  }
};

// log((e^u - 1) / u)
double log_uniform_mgf(double u) {
  if (u == 0.0) return 0.0;
  if (u > 0.0) return u + std::log(-std::expm1(-u)) - std::log(u);
  return std::log(-std::expm1(u)) - std::log(-u);
}

// Mean of the unit uniform tilted by e^{u x}.
double tilted_uniform_mean(double u) {
  if (std::fabs(u) < 1e-4) return 0.5 + u / 12.0 - u * u * u / 720.0;
  return 1.0 / (-std::expm1(-u)) - 1.0 / u;
}

double tilted_uniform_variance(double u) {
  if (std::fabs(u) < 0.05) {
    const double u2 = u * u;
    return 1.0 / 12.0 - u2 / 240.0 + u2 * u2 / 6048.0;
  }
  const double sh = std::sinh(0.5 * u);
  return 1.0 / (u * u) - 1.0 / (4.0 * sh * sh);
}

struct UniformMixtureImpl final : CgfHandle::Impl {
  std::vector<double> lo, width, logw;
  UniformMixtureImpl(std::vector<double> lows, const std::vector<double>& highs, const std::vector<double>& weights)
      : lo(std::move(lows)) {
    double m = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      width.push_back(highs[i] - lo[i]);
      m += weights[i] * (lo[i] + 0.5 * width[i]);
    }
    for (double& x : lo) x -= m;
    for (double w : weights) logw.push_back(std::log(w));
  }
  CgfKind kind() const override { return CgfKind::closed_form; }
  CgfValue at(double c) const override {
    std::vector<double> lw(lo.size()), m(lo.size()), v(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double u = c * width[i];
      lw[i] = logw[i] + c * lo[i] + log_uniform_mgf(u);
      m[i] = lo[i] + width[i] * tilted_uniform_mean(u);
      v[i] = width[i] * width[i] * tilted_uniform_variance(u);
    }
    return combine_components(lw, m, v);
  }
  std::optional<std::pair<double, double>> atom(bool upper) const override {
    double best = upper ? -INFINITY : INFINITY;
    for (std::size_t i = 0; i < lo.size(); ++i) best = upper ? std::max(best, lo[i] + width[i]) : std::min(best, lo[i]);
    return std::pair{best, 0.0};
  }
};

CgfValue from_sums(const TiltedSums& s) {
  const double mean = s.wv / s.w;
  return {s.shift + std::log(s.w / static_cast<double>(s.n)), mean,
          std::max(0.0, s.wv2 / s.w - mean * mean), s.w * s.w / s.w2};
}

std::vector<double> centered(std::vector<double> v) {
  const double m = pairwise_sum(v) / static_cast<double>(v.size());
  for (double& x : v) x -= m;
  return v;
}

struct SampleImpl final : CgfHandle::Impl {
  std::vector<double> v;
  Exec exec;
  SampleImpl(std::vector<double> values, Exec e) : v(centered(std::move(values))), exec(e) {}
  CgfKind kind() const override { return CgfKind::mc_estimate; }
  CgfValue at(double c) const override { return from_sums(tilted_sums(v, c, exec)); }
  std::optional<std::pair<double, double>> atom(bool upper) const override {
    const double best = upper ? *std::max_element(v.begin(), v.end())
                              : *std::min_element(v.begin(), v.end());
    const auto count = std::count(v.begin(), v.end(), best);
    return std::pair{best, static_cast<double>(count) / static_cast<double>(v.size())};
  }
  std::size_t samples() const override { return v.size(); }
};

struct MixtureImpl final : CgfHandle::Impl {
  std::vector<std::vector<double>> sets;
  Exec exec;
  MixtureImpl(std::vector<std::vector<double>> s, Exec e) : sets(std::move(s)), exec(e) {
    for (auto& x : sets) x = centered(std::move(x));
  }
  CgfKind kind() const override { return CgfKind::mixture; }
  CgfValue at(double c) const override {
    std::vector<CgfValue> parts(sets.size());
    for_each_index(sets.size(), exec,
                   [&](std::size_t i) { parts[i] = from_sums(tilted_sums(sets[i], c, Exec::serial)); });
    std::vector<double> a(parts.size()), b(parts.size()), d(parts.size());
    double ess = INFINITY;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      a[i] = parts[i].value;
      b[i] = parts[i].first;
      d[i] = parts[i].second;
      ess = std::min(ess, parts[i].ess);
    }
    const double n = static_cast<double>(parts.size());
    return {pairwise_sum(a) / n, pairwise_sum(b) / n, pairwise_sum(d) / n, ess};
  }
  std::size_t samples() const override {
    std::size_t n = 0;
    for (const auto& s : sets) n += s.size();
    return n;
  }
};

struct CustomImpl final : CgfHandle::Impl {
  CgfHandle::Custom spec;
  explicit CustomImpl(CgfHandle::Custom s) : spec(std::move(s)) {}
  CgfKind kind() const override { return CgfKind::closed_form; }
  double first(double c) const {
    if (spec.first) return spec.first(c);
    const double h = 1e-5 * (1.0 + std::fabs(c));
    return (spec.lambda(c + h) - spec.lambda(c - h)) / (2.0 * h);
  }
  CgfValue at(double c) const override {
    const double h = 1e-5 * (1.0 + std::fabs(c));
    return {spec.lambda(c), first(c), (first(c + h) - first(c - h)) / (2.0 * h)};
  }
  double d_minus() const override { return spec.d_minus; }
  double d_plus() const override { return spec.d_plus; }
  std::optional<CgfValue> at_boundary(bool upper) const override {
    if (!upper || !spec.lambda_at_d_plus) return std::nullopt;
    CgfValue v;
    v.value = *spec.lambda_at_d_plus;
    if (spec.first_at_d_plus) {
      v.first = *spec.first_at_d_plus;
    } else {
      const double h = 1e-6 * (1.0 + std::fabs(spec.d_plus));
      v.first = (v.value - spec.lambda(spec.d_plus - h)) / h;
    }
    return v;
  }
};

std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidParams, "weights must be nonnegative");
    total += x;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParams, "weights must have positive sum");
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

CgfHandle CgfHandle::gaussian(double variance) {
  if (!(variance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be >= 0");
  CgfHandle h;
  h.impl_ = std::make_shared<GaussianImpl>(variance);
  return h;
}

CgfHandle CgfHandle::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "gamma shape and scale must be > 0");
  }
  CgfHandle h;
  h.impl_ = std::make_shared<GammaImpl>(shape, scale);
  return h;
}

CgfHandle CgfHandle::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "values and probabilities must match");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidParams, "probabilities must sum to 1");
  CgfHandle h;
  h.impl_ = std::make_shared<DiscreteImpl>(std::move(values), std::move(probs));
  return h;
}

CgfHandle CgfHandle::gaussian_mixture(std::vector<double> means, double variance, std::vector<double> weights) {
  if (means.empty() || means.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "means and weights must match");
  }
  if (!(variance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be >= 0");
  CgfHandle h;
  h.impl_ = std::make_shared<GaussianMixtureImpl>(std::move(means), variance, normalized(std::move(weights)));
  return h;
}

CgfHandle CgfHandle::uniform_mixture(std::vector<double> lo, std::vector<double> hi, std::vector<double> weights) {
  if (lo.empty() || lo.size() != hi.size() || lo.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bin bounds and weights must match");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) throw Error(ErrorCode::InvalidArgument, "bins need positive width");
  }
  auto w = normalized(std::move(weights));
  std::vector<double> l2, h2, w2;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (w[i] > 0.0) {
      l2.push_back(lo[i]);
      h2.push_back(hi[i]);
      w2.push_back(w[i]);
    }
  }
  CgfHandle h;
  h.impl_ = std::make_shared<UniformMixtureImpl>(std::move(l2), h2, w2);
  return h;
}

CgfHandle CgfHandle::from_samples(std::vector<double> values, Exec exec) {
  if (values.empty()) throw Error(ErrorCode::EmptyData, "no samples for the CGF");
  CgfHandle h;
  h.impl_ = std::make_shared<SampleImpl>(std::move(values), exec);
  return h;
}

CgfHandle CgfHandle::mixture(std::vector<std::vector<double>> sets, Exec exec) {
  if (sets.empty()) throw Error(ErrorCode::EmptyData, "no sample sets for the CGF");
  for (const auto& s : sets) {
    if (s.empty()) throw Error(ErrorCode::EmptyData, "empty sample set");
  }
  CgfHandle h;
  h.impl_ = std::make_shared<MixtureImpl>(std::move(sets), exec);
  return h;
}

CgfHandle CgfHandle::custom(Custom spec) {
  if (!spec.lambda) throw Error(ErrorCode::InvalidArgument, "custom CGF needs an evaluator");
  CgfHandle h;
  h.impl_ = std::make_shared<CustomImpl>(std::move(spec));
  return h;
}

CgfKind CgfHandle::kind() const { return impl_->kind(); }

CgfHandle CgfHandle::negated() const {
  CgfHandle h = *this;
  h.sign_ = -sign_;
  return h;
}

double CgfHandle::d_minus() const { return sign_ > 0 ? impl_->d_minus() : -impl_->d_plus(); }
double CgfHandle::d_plus() const { return sign_ > 0 ? impl_->d_plus() : -impl_->d_minus(); }

CgfValue CgfHandle::derivatives(double c) const {
  if (c >= d_plus() || c <= d_minus()) {
    if (c == d_plus()) {
      if (auto b = at_d_plus()) return *b;
    }
    throw Error(ErrorCode::DomainExceeded, "c = " + std::to_string(c) + " outside the CGF domain");
  }
  CgfValue v = impl_->at(sign_ * c);
  v.first *= sign_;
  return v;
}

double CgfHandle::eval(double c) const { return derivatives(c).value; }

std::optional<CgfValue> CgfHandle::at_d_plus() const {
  auto v = impl_->at_boundary(sign_ > 0);
  if (v) v->first *= sign_;
  return v;
}

std::optional<std::pair<double, double>> CgfHandle::sup_atom() const {
  auto a = impl_->atom(sign_ > 0);
  if (a) a->first *= sign_;
  return a;
}

std::size_t CgfHandle::sample_count() const { return impl_->samples(); }

const char* to_string(BoundaryCase b) {
  switch (b) {
    case BoundaryCase::interior: return "interior";
    case BoundaryCase::eta_saturated_ess_sup: return "eta_saturated_ess_sup";
    case BoundaryCase::eta_saturated_finite_d: return "eta_saturated_finite_d";
    case BoundaryCase::c_capped_mc: return "c_capped_mc";
  }
  return "interior";
}

double cgf_eval(const CgfHandle& handle, double c) { return handle.eval(c); }

double eta_of_tilt(const CgfHandle& handle, double c) {
  const auto v = handle.derivatives(c);
  return c * v.first - v.value;
}

namespace {

double golden_section(const CgfHandle& h, double eta, double lo, double hi, std::size_t& iters) {
  auto bound = [&](double c) { return (h.eval(c) + eta) / c; };
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = bound(x1), f2 = bound(x2);
  for (std::size_t i = 0; i < 200 && b - a > 1e-14 * b; ++i, ++iters) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = bound(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = bound(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TiltSolution solve_index(const CgfHandle& handle, double eta, int sign, const SolveOptions& opt) {
  if (!(eta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");
  const double s = sign >= 0 ? 1.0 : -1.0;
  const CgfHandle h = sign >= 0 ? handle : handle.negated();
  const bool mc = h.kind() == CgfKind::mc_estimate || h.kind() == CgfKind::mixture;
  TiltSolution sol;
  if (eta == 0.0) return sol;

  auto finish = [&](double value) {
    sol.value = s * value;
    return sol;
  };
  auto g_of = [](const CgfValue& v, double c) { return c * v.first - v.value; };

  if (auto atom = h.sup_atom(); atom && atom->second > 0.0) {
    const double eta_plus = -std::log(atom->second);
    if (eta >= eta_plus) {
      sol.boundary = BoundaryCase::eta_saturated_ess_sup;
      sol.c = INFINITY;
      sol.eta_achieved = eta_plus;
      sol.lower_bound = mc;
      return finish(atom->first);
    }
  }
  const double d_plus = h.d_plus();
  if (std::isfinite(d_plus)) {
    if (auto b = h.at_d_plus()) {
      const double eta_plus = d_plus * b->first - b->value;
      if (eta >= eta_plus) {
        sol.boundary = BoundaryCase::eta_saturated_finite_d;
        sol.c = d_plus;
        sol.eta_achieved = eta_plus;
        return finish((b->value + eta) / d_plus);
      }
    }
  }

  const double var0 = h.derivatives(0.0).second;
  if (var0 == 0.0 && h.kind() == CgfKind::closed_form) return sol;
  double lo = 0.0, g_lo = 0.0;
  double hi = var0 > 0.0 ? std::sqrt(2.0 * eta / var0) : 1.0;
  if (std::isfinite(d_plus)) hi = std::min(hi, 0.5 * d_plus);
  const double hi_start = hi;
  CgfValue vh;
  double g_hi = 0.0;
  for (;;) {
    vh = h.derivatives(hi);
    ++sol.iterations;
    if (mc && vh.ess < opt.ess_threshold) {
      double a = lo, b = hi;
      for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (a + b);
        if (h.derivatives(m).ess >= opt.ess_threshold) a = m; else b = m;
      }
      const CgfValue vc = h.derivatives(a);
      const double g_cap = g_of(vc, a);
      if (g_cap < eta) {
        sol.boundary = BoundaryCase::c_capped_mc;
        sol.c = a;
        sol.eta_achieved = g_cap;
        sol.ess = vc.ess;
        sol.lower_bound = true;
        sol.converged = false;
        if (var0 > 0.0 && a * std::sqrt(var0) < 0.1) sol.warnings.push_back("MGFNonexistent");
        return finish(vc.first);
      }
      hi = a;
      vh = vc;
    }
    g_hi = g_of(vh, hi);
    if (g_hi >= eta) break;
    lo = hi;
    g_lo = g_hi;
    if (std::isfinite(d_plus)) {
      hi = 2.0 * hi < d_plus ? 2.0 * hi : 0.5 * (hi + d_plus);
      if (d_plus - hi <= 1e-15 * d_plus) {
        sol.boundary = BoundaryCase::eta_saturated_finite_d;
        sol.c = hi;
        sol.eta_achieved = g_hi;
        return finish((vh.value + eta) / hi);
      }
    } else {
      hi *= 2.0;
      if (hi > 1e12 * std::max(1.0, hi_start)) {
        sol.boundary = BoundaryCase::eta_saturated_ess_sup;
        sol.c = INFINITY;
        sol.eta_achieved = g_hi;
        sol.lower_bound = true;
        return finish(vh.first);
      }
    }
  }

  const double bracket_lo = std::max(lo, 1e-300);
  const double bracket_hi = hi;
  const double tol_stop = std::max(1e-15, 1e-13 * eta);
  const double jitter = 1e-12 * (1.0 + eta);
  double c = hi;
  CgfValue v = vh;
  double g = g_hi;
  bool nonmonotone = false;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const double r = g - eta;
    if (std::fabs(r) <= tol_stop) break;
    if (r > 0.0) {
      hi = c;
      g_hi = g;
    } else {
      lo = c;
      g_lo = g;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double slope = c * v.second;
    double next = slope > 0.0 ? c - r / slope : -1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    c = next;
    v = h.derivatives(c);
    g = g_of(v, c);
    ++sol.iterations;
    if (g < g_lo - jitter || g > g_hi + jitter) {
      nonmonotone = true;
      break;
    }
  }
  if (nonmonotone) {
    const double cstar = golden_section(h, eta, bracket_lo, bracket_hi, sol.iterations);
    const CgfValue vs = h.derivatives(cstar);
    sol.c = cstar;
    sol.eta_achieved = g_of(vs, cstar);
    sol.ess = vs.ess;
    sol.converged = false;
    sol.warnings.push_back("NonConvexEstimate");
    return finish((vs.value + eta) / cstar);
  }
  sol.c = c;
  sol.eta_achieved = g;
  sol.ess = v.ess;
  sol.converged = std::fabs(g - eta) <= std::max(1e-10, 1e-6 * eta);
  if (mc && v.ess < opt.ess_threshold) sol.warnings.push_back("WeightDegeneracy");
  return finish(v.first);
}

TiltWeights tilt_weights(std::span<const double> f, double c, double ess_threshold) {
  if (f.empty()) throw Error(ErrorCode::EmptyData, "no values to tilt");
  TiltWeights out;
  double m = -INFINITY;
  for (double x : f) m = std::max(m, c * x);
  out.weights.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out.weights[i] = std::exp(c * f[i] - m);
  const double total = pairwise_sum(out.weights);
  double sq = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.weights[i] /= total;
    sq += out.weights[i] * out.weights[i];
    mean += out.weights[i] * f[i];
  }
  out.ess = 1.0 / sq;
  out.tilted_mean = mean;
  out.degenerate = out.ess < ess_threshold;
  return out;
}

GaussianTilt tilt_gaussian(double mean, double variance, double a, double c) {
  return {mean + c * a * variance, variance};
}

}  // namespace bnuq
