#include "bnuq/indices.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bnuq/error.hpp"

namespace bnuq {

const char* to_string(AmbiguityKind k) {
  switch (k) {
    case AmbiguityKind::whole_model: return "whole_model";
    case AmbiguityKind::vertex_free_parents: return "vertex_free_parents";
    case AmbiguityKind::vertex_fixed_parents: return "vertex_fixed_parents";
  }
  return "unknown";
}

const char* to_string(Backend b) {
  switch (b) {
    case Backend::gaussian_closed_form: return "gaussian_closed_form";
    case Backend::exact_enumeration: return "exact_enumeration";
    case Backend::linear_closed_form: return "linear_closed_form";
    case Backend::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kMaxEnumeratedStates = 1u << 20;

void check_eta(double eta) {
  if (!(eta >= 0.0) || std::isnan(eta)) {
    throw Error(ErrorCode::InvalidArgument, "eta must be nonnegative");
  }
}

std::vector<Vertex> topo_filter(const DirectedGraphModel& model, const std::vector<Vertex>& set) {
  std::vector<char> in(model.size(), 0);
  for (Vertex v : set) in[v] = 1;
  std::vector<Vertex> out;
  for (Vertex v : model.order()) {
    if (in[v]) out.push_back(v);
  }
  return out;
}

bool contains(const std::vector<Vertex>& sorted, Vertex v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

bool all_linear_gaussian(const DirectedGraphModel& model, const std::vector<Vertex>& set) {
  return std::all_of(set.begin(), set.end(), [&](Vertex v) {
    return std::holds_alternative<LinearGaussianCPD>(model.cpd(v));
  });
}

bool enumerable(const DirectedGraphModel& model) {
  if (!model.is_finite_discrete()) return false;
  double states = 1.0;
  for (const auto& c : model.cpds()) states *= static_cast<double>(std::get<FiniteDiscreteCPD>(c).cardinality);
  return states <= static_cast<double>(kMaxEnumeratedStates);
}

// Backward accumulation t_p += beta_{v,p} t_v in reverse topological order.
std::optional<std::vector<double>> propagate_effects(const DirectedGraphModel& model, std::vector<double> t) {
  const auto& order = model.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Vertex v = *it;
    if (t[v] == 0.0) continue;
    const auto form = linear_form(model.cpd(v));
    if (!form) return std::nullopt;
    const auto& ps = model.graph().parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) t[ps[i]] += form->coefficients[i] * t[v];
  }
  return t;
}

// Unconditional means for vertices with linear forms; NaN where unavailable.
std::vector<double> linear_means(const DirectedGraphModel& model) {
  std::vector<double> mu(model.size(), std::numeric_limits<double>::quiet_NaN());
  for (Vertex v : model.order()) {
    const auto form = linear_form(model.cpd(v));
    if (!form) continue;
    double m = form->intercept + form->noise_mean;
    const auto& ps = model.graph().parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) m += form->coefficients[i] * mu[ps[i]];
    mu[v] = m;
  }
  return mu;
}

struct CrossingSlopes {
  double first;
  double second;
};

CrossingSlopes crossing_slopes(const DirectedGraphModel& model, const CrossingQoi& c) {
  const double s1 = effective_coefficient(model, c.first, c.pivot).value;
  const double s2 = effective_coefficient(model, c.second, c.pivot).value;
  if (s1 == s2) throw Error(ErrorCode::ParallelLines, "conditional-mean lines are parallel");
  return {s1, s2};
}

std::vector<double> qoi_values(const DirectedGraphModel& model, const QuantityOfInterest& qoi, std::size_t n,
                               std::uint64_t seed, Exec exec) {
  const auto vertices = topo_filter(model, qoi_ancestor_closure(model.graph(), qoi));
  std::vector<double> out(n);
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  for_each_index(blocks, exec, [&](std::size_t b) {
    Engine rng = make_engine(seed, b);
    std::vector<double> row(model.size(), 0.0);
    const std::size_t end = std::min(n, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) {
      sample_subset(model, vertices, row, rng);
      out[i] = qoi.evaluate(row);
    }
  });
  return out;
}

CgfHandle exact_qoi_handle(const DirectedGraphModel& model, const QuantityOfInterest& qoi) {
  const auto joint = enumerate_discrete(model, kMaxEnumeratedStates);
  std::vector<double> values(joint.states.size());
  for (std::size_t s = 0; s < joint.states.size(); ++s) values[s] = qoi.evaluate(joint.states[s]);
  return CgfHandle::discrete(std::move(values), joint.probs);
}

// CGF of t e for the noise e of an additive-noise CPD; nullopt for other
// families. A zero t gives a point mass at 0.
std::optional<CgfHandle> scaled_noise_handle(const ConditionalDensity& cpd, double t) {
  if (t == 0.0) return CgfHandle::gaussian(0.0);
  if (const auto* g = std::get_if<GammaCPD>(&cpd)) {
    const auto h = CgfHandle::gamma(g->shape, std::fabs(t) * g->scale);
    return t > 0.0 ? h : h.negated();
  }
  const auto* an = std::get_if<AdditiveNoiseCPD>(&cpd);
  if (!an) return std::nullopt;
  if (const auto* h = std::get_if<HistogramDensity>(&an->noise)) {
    std::vector<double> lo, hi, w;
    for (std::size_t k = 0; k < h->counts.size(); ++k) {
      const double a = t * h->edges[k], b = t * h->edges[k + 1];
      lo.push_back(std::min(a, b));
      hi.push_back(std::max(a, b));
      w.push_back(static_cast<double>(h->counts[k]));
    }
    return CgfHandle::uniform_mixture(std::move(lo), std::move(hi), std::move(w));
  }
  if (const auto* k = std::get_if<KernelDensity>(&an->noise)) {
    std::vector<double> mu;
    for (double p : k->points) mu.push_back(t * p);
    std::vector<double> w(mu.size(), 1.0);
    return CgfHandle::gaussian_mixture(std::move(mu), t * t * k->bandwidth * k->bandwidth, std::move(w));
  }
  const auto& pm = std::get<PointMassDensity>(an->noise);
  std::vector<double> v;
  for (double p : pm.points) v.push_back(t * p);
  return CgfHandle::discrete(std::move(v), pm.probs);
}

TiltSolution zero_solution() {
  TiltSolution s;
  s.eta_achieved = 0.0;
  return s;
}

TiltSolution closed_gaussian(double variance, double eta, int sign) {
  TiltSolution s;
  s.eta_achieved = eta;
  if (!(variance > 0.0) || eta == 0.0) return s;
  s.value = sign * std::sqrt(2.0 * variance * eta);
  s.c = std::sqrt(2.0 * eta / variance);
  return s;
}

IndexResult make_result(AmbiguityKind kind, double eta, Backend backend) {
  IndexResult r;
  r.kind = kind;
  r.eta = eta;
  r.backend = backend;
  return r;
}

void collect_warnings(IndexResult& r) {
  for (const auto* s : {&r.plus, &r.minus}) {
    for (const auto& w : s->warnings) {
      if (std::find(r.diagnostics.begin(), r.diagnostics.end(), w) == r.diagnostics.end()) {
        r.diagnostics.push_back(w);
      }
    }
  }
}

// Mixed-radix code of the states of `vars` in `row`, first variable most significant.
std::size_t state_code(const std::vector<Vertex>& vars, const std::vector<std::size_t>& card,
                       std::span<const double> row) {
  std::size_t code = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) code = code * card[i] + static_cast<std::size_t>(row[vars[i]]);
  return code;
}

void decode_state(std::size_t code, const std::vector<Vertex>& vars, const std::vector<std::size_t>& card,
                  std::span<double> row) {
  for (std::size_t i = vars.size(); i-- > 0;) {
    row[vars[i]] = static_cast<double>(code % card[i]);
    code /= card[i];
  }
}

std::size_t state_count(const std::vector<std::size_t>& card) {
  std::size_t n = 1;
  for (auto c : card) n *= c;
  return n;
}

std::size_t cardinality(const DirectedGraphModel& model, Vertex v) {
  return std::get<FiniteDiscreteCPD>(model.cpd(v)).cardinality;
}

double cpd_prob(const DirectedGraphModel& model, Vertex v, std::span<const double> row) {
  const auto& d = std::get<FiniteDiscreteCPD>(model.cpd(v));
  const auto& ps = model.graph().parents(v);
  std::vector<double> pv(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) pv[i] = row[ps[i]];
  return d.prob(static_cast<std::size_t>(row[v]), d.row_index(pv));
}

struct Factor {
  std::vector<Vertex> scope;  // sorted
  std::vector<std::size_t> card;
  std::vector<double> values;

  double at(std::span<const double> row) const { return values[state_code(scope, card, row)]; }
};

OptimizerNetwork discrete_optimizer(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                    const TiltSolution& sol, int sign) {
  const std::size_t n = model.size();
  const auto closure = topo_filter(model, qoi_ancestor_closure(model.graph(), qoi));
  std::vector<double> row(n, 0.0);

  Factor h;
  h.scope = qoi.vertex_set();
  for (Vertex v : h.scope) h.card.push_back(cardinality(model, v));
  h.values.resize(state_count(h.card));
  std::vector<double> fv(h.values.size());
  double fmax = -INFINITY;
  for (std::size_t s = 0; s < fv.size(); ++s) {
    decode_state(s, h.scope, h.card, row);
    fv[s] = sign * qoi.evaluate(row);
    fmax = std::max(fmax, fv[s]);
  }
  const bool limit = std::isinf(sol.c);
  for (std::size_t s = 0; s < fv.size(); ++s) {
    h.values[s] = limit ? (fv[s] == fmax ? 1.0 : 0.0) : std::exp(sol.c * (fv[s] - fmax));
  }

  std::vector<std::vector<Vertex>> parents(n);
  std::vector<ConditionalDensity> cpds = model.cpds();
  for (Vertex v = 0; v < n; ++v) parents[v] = model.graph().parents(v);

  for (auto it = closure.rbegin(); it != closure.rend(); ++it) {
    const Vertex l = *it;
    if (!contains(h.scope, l)) continue;
    const auto& pl = model.graph().parents(l);
    std::vector<Vertex> scope;
    for (Vertex v : h.scope) {
      if (v != l) scope.push_back(v);
    }
    for (Vertex v : pl) scope.push_back(v);
    std::sort(scope.begin(), scope.end());
    scope.erase(std::unique(scope.begin(), scope.end()), scope.end());

    Factor next;
    next.scope = scope;
    for (Vertex v : scope) next.card.push_back(cardinality(model, v));
    next.values.assign(state_count(next.card), 0.0);
    const std::size_t kl = cardinality(model, l);
    for (std::size_t s = 0; s < next.values.size(); ++s) {
      decode_state(s, next.scope, next.card, row);
      double acc = 0.0;
      for (std::size_t x = 0; x < kl; ++x) {
        row[l] = static_cast<double>(x);
        acc += cpd_prob(model, l, row) * h.at(row);
      }
      next.values[s] = acc;
    }

    std::vector<Vertex> qparents = pl;
    for (Vertex v : scope) {
      if (std::find(pl.begin(), pl.end(), v) == pl.end()) qparents.push_back(v);
    }
    FiniteDiscreteCPD q;
    q.cardinality = kl;
    for (Vertex v : qparents) q.parent_cardinalities.push_back(cardinality(model, v));
    q.table.assign(q.rows() * kl, 0.0);
    for (std::size_t r = 0; r < q.rows(); ++r) {
      decode_state(r, qparents, q.parent_cardinalities, row);
      const double z = next.at(row);
      for (std::size_t x = 0; x < kl; ++x) {
        row[l] = static_cast<double>(x);
        const double p = cpd_prob(model, l, row);
        q.table[r * kl + x] = z > 0.0 ? p * h.at(row) / z : p;
      }
    }
    parents[l] = qparents;
    cpds[l] = std::move(q);
    h = std::move(next);
  }
  DirectedGraph g(std::move(parents), model.graph().labels());
  return {DirectedGraphModel(std::move(g), std::move(cpds)), sol};
}

struct NestedAccumulator {
  std::vector<double> plus, minus, c_plus, c_minus, ess;
  std::vector<BoundaryCase> b_plus, b_minus;
  std::vector<char> lb_plus, lb_minus, conv;
  std::vector<std::vector<std::string>> warn;

  explicit NestedAccumulator(std::size_t n)
      : plus(n), minus(n), c_plus(n), c_minus(n), ess(n, INFINITY), b_plus(n), b_minus(n),
        lb_plus(n, 0), lb_minus(n, 0), conv(n, 1), warn(n) {}

  void store(std::size_t i, const TiltSolution& p, const TiltSolution& m, double weight) {
    plus[i] = weight * p.value;
    minus[i] = weight * m.value;
    c_plus[i] = weight * p.c;
    c_minus[i] = weight * m.c;
    ess[i] = std::min(p.ess, m.ess);
    b_plus[i] = p.boundary;
    b_minus[i] = m.boundary;
    lb_plus[i] = p.lower_bound;
    lb_minus[i] = m.lower_bound;
    conv[i] = p.converged && m.converged;
    warn[i] = p.warnings;
    warn[i].insert(warn[i].end(), m.warnings.begin(), m.warnings.end());
  }

  // Weighted sums, weights already folded into the stored values.
  void finish(IndexResult& r, double eta) const {
    const auto fill = [&](TiltSolution& s, const std::vector<double>& v, const std::vector<double>& c,
                          const std::vector<BoundaryCase>& b, const std::vector<char>& lb) {
      s.value = pairwise_sum(v);
      s.c = pairwise_sum(c);
      s.eta_achieved = eta;
      s.boundary = BoundaryCase::interior;
      std::size_t off = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] != BoundaryCase::interior) {
          if (off == 0) s.boundary = b[i];
          ++off;
        }
        if (lb[i]) s.lower_bound = true;
      }
      s.ess = *std::min_element(ess.begin(), ess.end());
      s.converged = std::all_of(conv.begin(), conv.end(), [](char x) { return x != 0; });
      return off;
    };
    const std::size_t op = fill(r.plus, plus, c_plus, b_plus, lb_plus);
    const std::size_t om = fill(r.minus, minus, c_minus, b_minus, lb_minus);
    if (op + om > 0) {
      r.diagnostics.push_back("boundary configurations: plus " + std::to_string(op) + ", minus " +
                              std::to_string(om) + " of " + std::to_string(plus.size()));
    }
    for (const auto& w : warn) {
      for (const auto& s : w) {
        if (std::find(r.diagnostics.begin(), r.diagnostics.end(), s) == r.diagnostics.end()) {
          r.diagnostics.push_back(s);
        }
      }
    }
  }
};

bool fixed_parent_tight(const DirectedGraphModel& model, const QuantityOfInterest& qoi, Vertex l) {
  for (Vertex a : qoi.vertex_set()) {
    if (!contains(ancestors_closed(model.graph(), a), l)) continue;
    if (!cond_indep_given_parents(model.graph(), a, l)) return false;
  }
  return true;
}

std::vector<IndexResult> discrete_sensitivity(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                              Vertex l, std::span<const double> etas, AmbiguityKind set,
                                              const SolveOptions& opt) {
  const auto joint = enumerate_discrete(model, kMaxEnumeratedStates);
  auto rho = ancestors(model.graph(), l);
  auto rho_bar = ancestors_closed(model.graph(), l);
  std::vector<std::size_t> card_rho, card_bar;
  for (Vertex v : rho) card_rho.push_back(cardinality(model, v));
  for (Vertex v : rho_bar) card_bar.push_back(cardinality(model, v));

  std::vector<double> pf(state_count(card_bar), 0.0), pm(pf.size(), 0.0);
  for (std::size_t s = 0; s < joint.states.size(); ++s) {
    const std::size_t code = state_code(rho_bar, card_bar, joint.states[s]);
    pf[code] += joint.probs[s] * qoi.evaluate(joint.states[s]);
    pm[code] += joint.probs[s];
  }
  const std::size_t kl = cardinality(model, l);
  const std::size_t configs = state_count(card_rho);
  std::vector<double> row(model.size(), 0.0);
  std::vector<IndexResult> out;
  for (double eta : etas) {
    out.push_back(make_result(set, eta, Backend::exact_enumeration));
    out.back().vertex = l;
  }
  std::vector<NestedAccumulator> acc;
  for (std::size_t e = 0; e < etas.size(); ++e) acc.emplace_back(configs);
  for (std::size_t cfg = 0; cfg < configs; ++cfg) {
    decode_state(cfg, rho, card_rho, row);
    std::vector<double> values, probs;
    double weight = 0.0;
    for (std::size_t x = 0; x < kl; ++x) {
      row[l] = static_cast<double>(x);
      const std::size_t code = state_code(rho_bar, card_bar, row);
      weight += pm[code];
      if (!(pm[code] > 0.0)) continue;
      values.push_back(pf[code] / pm[code]);
      probs.push_back(cpd_prob(model, l, row));
    }
    if (!(weight > 0.0)) continue;
    const auto h = CgfHandle::discrete(values, probs);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      if (etas[e] == 0.0) continue;
      acc[e].store(cfg, solve_index(h, etas[e], +1, opt), solve_index(h, etas[e], -1, opt), weight);
    }
  }
  for (std::size_t e = 0; e < etas.size(); ++e) acc[e].finish(out[e], etas[e]);
  return out;
}

}  // namespace

std::optional<std::vector<double>> qoi_total_effects(const DirectedGraphModel& model,
                                                     const QuantityOfInterest& qoi) {
  std::vector<double> w(model.size(), 0.0);
  if (const auto* a = qoi.as_affine()) {
    w[a->vertex] = a->slope;
  } else if (const auto* c = qoi.as_crossing()) {
    CrossingSlopes s;
    try {
      s = crossing_slopes(model, *c);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonGaussianModel) return std::nullopt;
      throw;
    }
    const double den = s.first - s.second;
    w[c->second] += 1.0 / den;
    w[c->first] -= 1.0 / den;
  } else {
    return std::nullopt;
  }
  return propagate_effects(model, std::move(w));
}

double qoi_mean(const DirectedGraphModel& model, const QuantityOfInterest& qoi, const McConfig& cfg) {
  const auto closure = qoi_ancestor_closure(model.graph(), qoi);
  const bool linear = std::all_of(closure.begin(), closure.end(),
                                  [&](Vertex v) { return linear_form(model.cpd(v)).has_value(); });
  if (const auto* c = qoi.as_crossing()) {
    if (!linear) throw Error(ErrorCode::NonGaussianModel, "crossing QoI needs linear conditional means");
    const auto mu = linear_means(model);
    const auto s = crossing_slopes(model, *c);
    const double x0 = linear_form(model.cpd(c->pivot))->intercept;
    return x0 + (mu[c->second] - mu[c->first]) / (s.first - s.second);
  }
  if (const auto* a = qoi.as_affine(); a && linear) {
    return a->slope * linear_means(model)[a->vertex] + a->offset;
  }
  if (enumerable(model)) {
    const auto joint = enumerate_discrete(model, kMaxEnumeratedStates);
    double m = 0.0;
    for (std::size_t s = 0; s < joint.states.size(); ++s) m += joint.probs[s] * qoi.evaluate(joint.states[s]);
    return m;
  }
  const auto v = qoi_values(model, qoi, cfg.samples, cfg.seed, cfg.exec);
  return pairwise_sum(v) / static_cast<double>(v.size());
}

IndexResult gaussian_model_uncertainty_index(const DirectedGraphModel& model, Vertex k, double a, double eta) {
  check_eta(eta);
  model.graph().check_vertex(k);
  if (!all_linear_gaussian(model, ancestors_closed(model.graph(), k))) {
    throw Error(ErrorCode::NonGaussianModel, "ancestor closure of " + model.graph().label(k) +
                                                 " is not linear-Gaussian");
  }
  std::vector<double> w(model.size(), 0.0);
  w[k] = a;
  const auto t = *propagate_effects(model, std::move(w));
  double var = 0.0;
  for (Vertex v = 0; v < model.size(); ++v) {
    if (t[v] == 0.0) continue;
    const double sd = std::get<LinearGaussianCPD>(model.cpd(v)).noise_sd;
    var += t[v] * t[v] * sd * sd;
  }
  auto r = make_result(AmbiguityKind::whole_model, eta, Backend::gaussian_closed_form);
  r.plus = closed_gaussian(var, eta, +1);
  r.minus = closed_gaussian(var, eta, -1);
  return r;
}

std::vector<IndexResult> model_uncertainty_sweep(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                                                 std::span<const double> etas, const McConfig& cfg) {
  for (double e : etas) check_eta(e);
  if (qoi.as_crossing()) {
    throw Error(ErrorCode::UnsupportedQoI, "the crossing QoI is defined for per-vertex sensitivity only");
  }
  const auto closure = qoi_ancestor_closure(model.graph(), qoi);
  const auto* affine = qoi.as_affine();
  const bool gaussian = affine && all_linear_gaussian(model, closure);
  std::vector<IndexResult> out;
  if (cfg.backend != BackendChoice::monte_carlo && gaussian) {
    for (double e : etas) out.push_back(gaussian_model_uncertainty_index(model, affine->vertex, affine->slope, e));
    return out;
  }
  if (cfg.backend == BackendChoice::closed_form) {
    throw Error(ErrorCode::NonGaussianModel, "closed form requires an affine QoI on a linear-Gaussian closure");
  }
  std::optional<CgfHandle> handle;
  Backend backend = Backend::monte_carlo;
  if (cfg.backend == BackendChoice::automatic && enumerable(model)) {
    handle = exact_qoi_handle(model, qoi);
    backend = Backend::exact_enumeration;
  } else {
    handle = CgfHandle::from_samples(qoi_values(model, qoi, cfg.samples, cfg.seed, cfg.exec), cfg.exec);
  }
  for (double e : etas) {
    auto r = make_result(AmbiguityKind::whole_model, e, backend);
    if (e > 0.0) {
      r.plus = solve_index(*handle, e, +1, cfg.solve);
      r.minus = solve_index(*handle, e, -1, cfg.solve);
      collect_warnings(r);
    }
    out.push_back(std::move(r));
  }
  return out;
}

IndexResult model_uncertainty_index(const DirectedGraphModel& model, const QuantityOfInterest& qoi, double eta,
                                    const McConfig& cfg) {
  const double etas[] = {eta};
  return std::move(model_uncertainty_sweep(model, qoi, etas, cfg).front());
}

OptimizerNetwork optimizer_network(const DirectedGraphModel& model, const QuantityOfInterest& qoi, double eta,
                                   int sign) {
  check_eta(eta);
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  if (qoi.as_crossing()) throw Error(ErrorCode::UnsupportedQoI, "no optimizer network for the crossing QoI");
  const auto closure = qoi_ancestor_closure(model.graph(), qoi);
  if (const auto* a = qoi.as_affine(); a && all_linear_gaussian(model, closure)) {
    const auto r = gaussian_model_uncertainty_index(model, a->vertex, a->slope, eta);
    const auto& sol = sign > 0 ? r.plus : r.minus;
    std::vector<double> w(model.size(), 0.0);
    w[a->vertex] = a->slope;
    const auto t = *propagate_effects(model, std::move(w));
    auto cpds = model.cpds();
    for (Vertex v : closure) {
      auto& lg = std::get<LinearGaussianCPD>(cpds[v]);
      lg.intercept += sign * sol.c * t[v] * lg.noise_sd * lg.noise_sd;
    }
    return {DirectedGraphModel(model.graph(), std::move(cpds)), sol};
  }
  if (enumerable(model)) {
    const auto h = exact_qoi_handle(model, qoi);
    const auto sol = eta > 0.0 ? solve_index(h, eta, sign) : zero_solution();
    return discrete_optimizer(model, qoi, sol, sign);
  }
  throw Error(ErrorCode::UnsupportedFamily,
              "optimizer networks need a linear-Gaussian model with affine QoI or a finite discrete model");
}

double ConditionalMean::operator()(std::span<const double> row) const {
  if (closed_form_) {
    double f = constant_;
    for (Vertex j : nonzero_) f += coefficients_[j] * row[j];
    return f;
  }
  if (free_.empty()) return qoi_.evaluate(row);
  std::vector<double> scratch(row.begin(), row.end());
  Engine rng = prototype_;
  double acc = 0.0;
  for (std::size_t m = 0; m < draws_; ++m) {
    for (Vertex v : free_) scratch[v] = model_->sample_vertex(v, scratch, rng);
    acc += qoi_.evaluate(scratch);
  }
  return acc / static_cast<double>(draws_);
}

ConditionalMean conditional_mean_F(const DirectedGraphModel& model, const QuantityOfInterest& qoi, Vertex l,
                                   const McConfig& cfg) {
  model.graph().check_vertex(l);
  if (qoi.as_crossing()) throw Error(ErrorCode::UnsupportedQoI, "crossing QoI has no sample-level F");
  const auto closure = qoi_ancestor_closure(model.graph(), qoi);
  if (!contains(closure, l)) {
    throw Error(ErrorCode::NotAncestor, model.graph().label(l) + " is not an ancestor of the QoI");
  }
  const auto rho_bar = ancestors_closed(model.graph(), l);
  std::vector<Vertex> rest;
  for (Vertex v : closure) {
    if (!contains(rho_bar, v)) rest.push_back(v);
  }
  rest = topo_filter(model, rest);

  ConditionalMean F;
  F.model_ = &model;
  F.qoi_ = qoi;
  const auto* affine = qoi.as_affine();
  const bool linear = std::all_of(rest.begin(), rest.end(),
                                  [&](Vertex v) { return linear_form(model.cpd(v)).has_value(); });
  if (affine && linear && cfg.backend != BackendChoice::monte_carlo) {
    std::vector<double> t(model.size(), 0.0);
    t[affine->vertex] = affine->slope;
    double constant = affine->offset;
    for (auto it = rest.rbegin(); it != rest.rend(); ++it) {
      const Vertex v = *it;
      if (t[v] == 0.0) continue;
      const auto form = *linear_form(model.cpd(v));
      constant += t[v] * (form.intercept + form.noise_mean);
      const auto& ps = model.graph().parents(v);
      for (std::size_t i = 0; i < ps.size(); ++i) t[ps[i]] += form.coefficients[i] * t[v];
      t[v] = 0.0;
    }
    F.closed_form_ = true;
    F.constant_ = constant;
    F.coefficients_ = std::move(t);
    for (Vertex j = 0; j < model.size(); ++j) {
      if (F.coefficients_[j] != 0.0) F.nonzero_.push_back(j);
    }
    return F;
  }
  if (cfg.backend == BackendChoice::closed_form) {
    throw Error(ErrorCode::NonGaussianModel, "closed-form F needs an affine QoI and linear descendants");
  }
  F.free_ = rest;
  const bool stochastic = std::any_of(rest.begin(), rest.end(), [&](Vertex v) { return model.is_stochastic(v); });
  F.draws_ = stochastic ? std::max<std::size_t>(1, cfg.f_samples) : 1;
  F.prototype_ = make_engine(cfg.seed, l, 0x46);
  return F;
}

std::vector<IndexResult> sensitivity_sweep(const DirectedGraphModel& model, const QuantityOfInterest& qoi, Vertex l,
                                           std::span<const double> etas, AmbiguityKind set, const McConfig& cfg) {
  model.graph().check_vertex(l);
  for (double e : etas) check_eta(e);
  if (set == AmbiguityKind::whole_model) {
    throw Error(ErrorCode::InvalidArgument, "per-vertex sensitivity needs a vertex ambiguity set");
  }
  const auto closure = qoi_ancestor_closure(model.graph(), qoi);
  const bool in_closure = contains(closure, l);
  const auto effects = in_closure && cfg.backend != BackendChoice::monte_carlo ? qoi_total_effects(model, qoi)
                                                                               : std::nullopt;
  const bool lg_l = std::holds_alternative<LinearGaussianCPD>(model.cpd(l));
  const bool closed = effects.has_value() && lg_l;
  const auto noise = effects && !lg_l ? scaled_noise_handle(model.cpd(l), (*effects)[l]) : std::nullopt;
  const bool exact = !closed && !noise && cfg.backend == BackendChoice::automatic && enumerable(model);
  if (cfg.backend == BackendChoice::closed_form && !closed && !noise && in_closure) {
    throw Error(ErrorCode::NonGaussianModel, "closed form requires linear forms and Gaussian noise at " +
                                                 model.graph().label(l));
  }
  const Backend backend = closed  ? Backend::gaussian_closed_form
                          : noise ? Backend::linear_closed_form
                          : exact ? Backend::exact_enumeration
                                  : Backend::monte_carlo;

  std::vector<IndexResult> out;
  for (double e : etas) {
    auto r = make_result(set, e, backend);
    r.vertex = l;
    out.push_back(std::move(r));
  }
  if (!in_closure) {
    for (auto& r : out) r.diagnostics.push_back("vertex is outside the ancestor closure of the QoI");
    return out;
  }
  if (std::all_of(etas.begin(), etas.end(), [](double e) { return e == 0.0; })) return out;

  if (closed) {
    const double t = (*effects)[l];
    const double sd = std::get<LinearGaussianCPD>(model.cpd(l)).noise_sd;
    const double var = t * t * sd * sd;
    for (auto& r : out) {
      r.plus = closed_gaussian(var, r.eta, +1);
      r.minus = closed_gaussian(var, r.eta, -1);
    }
    return out;
  }
  if (noise) {
    for (auto& r : out) {
      if (r.eta == 0.0) continue;
      r.plus = solve_index(*noise, r.eta, +1, cfg.solve);
      r.minus = solve_index(*noise, r.eta, -1, cfg.solve);
      collect_warnings(r);
    }
    return out;
  }
  if (qoi.as_crossing()) {
    throw Error(ErrorCode::UnsupportedQoI, "crossing QoI needs linear conditional means and additive noise");
  }
  const bool tight = set == AmbiguityKind::vertex_free_parents || fixed_parent_tight(model, qoi, l);
  if (exact) {
    auto res = discrete_sensitivity(model, qoi, l, etas, set, cfg.solve);
    for (auto& r : res) r.tight = tight;
    return res;
  }

  McConfig f_cfg = cfg;
  if (f_cfg.backend == BackendChoice::monte_carlo) f_cfg.backend = BackendChoice::automatic;
  const auto F = conditional_mean_F(model, qoi, l, f_cfg);
  const auto rho = topo_filter(model, ancestors(model.graph(), l));
  const std::size_t outer = rho.empty() ? 1 : std::max<std::size_t>(1, cfg.outer);
  const std::size_t inner = rho.empty() ? std::max(cfg.inner, cfg.samples) : cfg.inner;
  const Exec inner_exec = outer == 1 ? cfg.exec : Exec::serial;
  const double weight = 1.0 / static_cast<double>(outer);

  const auto inner_values = [&](std::size_t o) {
    Engine rng_outer = make_engine(cfg.seed, l + 1, 2 * o);
    Engine rng_inner = make_engine(cfg.seed, l + 1, 2 * o + 1);
    std::vector<double> row(model.size(), 0.0);
    sample_subset(model, rho, row, rng_outer);
    std::vector<double> vals(inner);
    for (std::size_t j = 0; j < inner; ++j) {
      row[l] = model.sample_vertex(l, row, rng_inner);
      vals[j] = F(row);
    }
    return vals;
  };

  if (cfg.jensen) {
    std::vector<std::vector<double>> sets(outer);
    for_each_index(outer, outer == 1 ? Exec::serial : cfg.exec, [&](std::size_t o) { sets[o] = inner_values(o); });
    const auto h = CgfHandle::mixture(std::move(sets), cfg.exec);
    for (auto& r : out) {
      r.jensen = true;
      r.tight = false;
      if (r.eta == 0.0) continue;
      r.plus = solve_index(h, r.eta, +1, cfg.solve);
      r.minus = solve_index(h, r.eta, -1, cfg.solve);
      collect_warnings(r);
    }
    return out;
  }

  std::vector<NestedAccumulator> acc;
  for (std::size_t e = 0; e < etas.size(); ++e) acc.emplace_back(outer);
  for_each_index(outer, outer == 1 ? Exec::serial : cfg.exec, [&](std::size_t o) {
    const auto h = CgfHandle::from_samples(inner_values(o), inner_exec);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      if (etas[e] == 0.0) continue;
      acc[e].store(o, solve_index(h, etas[e], +1, cfg.solve), solve_index(h, etas[e], -1, cfg.solve), weight);
    }
  });
  for (std::size_t e = 0; e < etas.size(); ++e) {
    out[e].tight = tight;
    acc[e].finish(out[e], etas[e]);
  }
  return out;
}

IndexResult sensitivity_index(const DirectedGraphModel& model, const QuantityOfInterest& qoi, Vertex l, double eta,
                              AmbiguityKind set, const McConfig& cfg) {
  const double etas[] = {eta};
  return std::move(sensitivity_sweep(model, qoi, l, etas, set, cfg).front());
}

EffectiveCoefficient effective_coefficient(const DirectedGraphModel& model, Vertex k, Vertex l) {
  const auto& g = model.graph();
  g.check_vertex(k);
  g.check_vertex(l);
  const auto closure = ancestors_closed(g, k);
  if (!contains(closure, l)) throw Error(ErrorCode::NotAncestor, g.label(l) + " is not an ancestor of " + g.label(k));
  const auto below = descendants(g, l);
  std::vector<double> b(model.size(), 0.0);
  b[l] = 1.0;
  std::vector<std::optional<LinearForm>> forms(model.size());
  for (Vertex v : model.order()) {
    if (v == l || !contains(closure, v) || !contains(below, v)) continue;
    forms[v] = linear_form(model.cpd(v));
    if (!forms[v]) throw Error(ErrorCode::NonGaussianModel, g.label(v) + " has no linear form");
    const auto& ps = g.parents(v);
    double s = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) s += forms[v]->coefficients[i] * b[ps[i]];
    b[v] = s;
  }
  EffectiveCoefficient out;
  out.value = b[k];
  constexpr std::size_t limit = 4096;
  for (auto& path : directed_paths(g, l, k, limit)) {
    double prod = 1.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      const auto& ps = g.parents(path[i]);
      const auto pos = static_cast<std::size_t>(std::find(ps.begin(), ps.end(), path[i - 1]) - ps.begin());
      prod *= forms[path[i]]->coefficients[pos];
    }
    out.paths.emplace_back(std::move(path), prod);
  }
  out.paths_truncated = out.paths.size() >= limit;
  return out;
}

IndexResult gaussian_sensitivity(const DirectedGraphModel& model, Vertex k, double a, Vertex l, double eta,
                                 AmbiguityKind set) {
  check_eta(eta);
  const auto& g = model.graph();
  g.check_vertex(k);
  g.check_vertex(l);
  auto r = make_result(set, eta, Backend::gaussian_closed_form);
  r.vertex = l;
  if (!contains(ancestors_closed(g, k), l)) return r;
  const auto* lg = std::get_if<LinearGaussianCPD>(&model.cpd(l));
  if (!lg) throw Error(ErrorCode::NonGaussianModel, "noise at " + g.label(l) + " is not Gaussian");
  const double bt = effective_coefficient(model, k, l).value;
  const double var = a * a * bt * bt * lg->noise_sd * lg->noise_sd;
  r.plus = closed_gaussian(var, eta, +1);
  r.minus = closed_gaussian(var, eta, -1);
  return r;
}

}  // namespace bnuq
