#include "bnuq/workflow.hpp"

#include <algorithm>
#include <cmath>

#include "bnuq/error.hpp"

namespace bnuq {

const char* to_string(BudgetSource s) {
  return s == BudgetSource::data_estimated ? "data_estimated" : "user_set";
}

const char* to_string(TolMode m) { return m == TolMode::absolute ? "absolute" : "relative"; }

const char* to_string(CorrectabilityCase c) {
  switch (c) {
    case CorrectabilityCase::identical: return "identical";
    case CorrectabilityCase::gaussian_mean_zero: return "gaussian_mean_zero";
    case CorrectabilityCase::general_descendants: return "general_descendants";
  }
  return "unknown";
}

double MisspecificationBudget::eta(Vertex v) const {
  const auto it = entries.find(v);
  if (it == entries.end()) {
    throw Error(ErrorCode::MissingBudget, "no misspecification budget for vertex " + std::to_string(v));
  }
  return it->second.eta;
}

MisspecificationBudget build_budget(const DirectedGraphModel& model,
                                    const std::map<Vertex, std::vector<double>>& residuals,
                                    const std::map<Vertex, double>& overrides, const DensityModel& density) {
  MisspecificationBudget b;
  for (Vertex v = 0; v < model.size(); ++v) {
    if (!model.is_stochastic(v)) continue;
    if (const auto o = overrides.find(v); o != overrides.end()) {
      if (!(o->second >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta override must be nonnegative");
      b.entries[v] = {o->second, BudgetSource::user_set, false};
    } else if (const auto d = residuals.find(v); d != residuals.end()) {
      const auto est = eta_from_samples(model.cpd(v), d->second, density);
      b.entries[v] = {est.eta, BudgetSource::data_estimated, est.saturated};
    } else {
      throw Error(ErrorCode::MissingBudget, "vertex " + model.graph().label(v) + " has neither data nor an override");
    }
  }
  return b;
}

MisspecificationBudget uniform_budget(const DirectedGraphModel& model, double eta) {
  std::map<Vertex, double> overrides;
  for (Vertex v = 0; v < model.size(); ++v) {
    if (model.is_stochastic(v)) overrides[v] = eta;
  }
  return build_budget(model, {}, overrides);
}

namespace {

// Centered residuals carry a rounding-level mean.
constexpr double kMeanZeroTol = 1e-12;

std::optional<double> try_mean(const DirectedGraphModel& model, const QuantityOfInterest& qoi, const McConfig& cfg) {
  try {
    return qoi_mean(model, qoi, cfg);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<double> relative_of(double index, const std::optional<double>& mean) {
  if (!mean || *mean == 0.0) return std::nullopt;
  return index / std::fabs(*mean);
}

std::vector<Vertex> stochastic_closure(const DirectedGraphModel& model, const QuantityOfInterest& qoi) {
  std::vector<Vertex> out;
  for (Vertex v : qoi_ancestor_closure(model.graph(), qoi)) {
    if (model.is_stochastic(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

RankingReport rank_components(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                              const MisspecificationBudget& budget, const McConfig& cfg, AmbiguityKind set) {
  for (Vertex v : stochastic_closure(model, qoi)) budget.eta(v);
  RankingReport report;
  report.qoi_mean = try_mean(model, qoi, cfg);
  double total = 0.0;
  for (const auto& [v, entry] : budget.entries) {
    RankingEntry e;
    e.vertex = v;
    e.eta = entry.eta;
    try {
      e.index = sensitivity_index(model, qoi, v, entry.eta, set, cfg);
      total += e.index.plus.value;
      e.relative = relative_of(e.index.plus.value, report.qoi_mean);
    } catch (const Error& err) {
      e.error = std::string(to_string(err.code())) + ": " + err.what();
    }
    report.entries.push_back(std::move(e));
  }
  report.degenerate = !(total > 0.0);
  for (auto& e : report.entries) {
    e.share = report.degenerate || e.error ? 0.0 : e.index.plus.value / total;
  }
  std::stable_sort(report.entries.begin(), report.entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.index.plus.value != b.index.plus.value) return a.index.plus.value > b.index.plus.value;
    return a.vertex < b.vertex;
  });
  return report;
}

Assessment assess(double index, double qoi_mean, double tol, TolMode mode) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  Assessment a;
  a.mode = mode;
  a.tol = tol;
  if (mode == TolMode::relative) {
    if (qoi_mean == 0.0) throw Error(ErrorCode::ZeroMeanRelative, "relative assessment needs a nonzero QoI mean");
    a.ratio = std::fabs(index) / std::fabs(qoi_mean);
  } else {
    a.ratio = std::fabs(index);
  }
  a.pass = a.ratio <= tol;
  return a;
}

double improvement_delta(const IndexResult& before, const IndexResult& after) {
  if (before.kind != after.kind || before.vertex != after.vertex) {
    throw Error(ErrorCode::MismatchedAmbiguity, "indices refer to different ambiguity sets");
  }
  return after.plus.value - before.plus.value;
}

CorrectabilityReport correctability_check(const DirectedGraphModel& p, const DirectedGraphModel& p_tilde,
                                          const QuantityOfInterest& qoi, const MisspecificationBudget& budget,
                                          const McConfig& cfg, AmbiguityKind set) {
  if (p.size() != p_tilde.size()) throw Error(ErrorCode::StructureMismatch, "models have different vertex counts");
  std::vector<Vertex> changed;
  for (Vertex v = 0; v < p.size(); ++v) {
    if (p.graph().parents(v) != p_tilde.graph().parents(v)) {
      throw Error(ErrorCode::StructureMismatch, "parent sets differ at " + p.graph().label(v));
    }
    if (!(p.cpd(v) == p_tilde.cpd(v))) changed.push_back(v);
  }
  if (changed.size() > 1) throw Error(ErrorCode::MultiVertexDiff, "more than one CPD differs");

  CorrectabilityReport report;
  report.mean_before = try_mean(p, qoi, cfg);
  report.mean_after = try_mean(p_tilde, qoi, cfg);
  const auto closure = stochastic_closure(p, qoi);
  const auto add_entry = [&](Vertex v) {
    CorrectabilityEntry e;
    e.vertex = v;
    e.eta = budget.eta(v);
    e.before = sensitivity_index(p, qoi, v, e.eta, set, cfg);
    e.after = sensitivity_index(p_tilde, qoi, v, e.eta, set, cfg);
    e.delta = improvement_delta(e.before, e.after);
    e.relative_before = relative_of(e.before.plus.value, report.mean_before);
    e.relative_after = relative_of(e.after.plus.value, report.mean_after);
    report.entries.push_back(std::move(e));
  };

  if (changed.empty()) {
    report.unchanged = closure;
    for (Vertex v : closure) add_entry(v);
    return report;
  }
  const Vertex ls = changed.front();
  report.corrected = ls;

  const auto* lg = std::get_if<LinearGaussianCPD>(&p.cpd(ls));
  const auto form = linear_form(p_tilde.cpd(ls));
  const bool gaussian = lg && form && form->intercept == lg->intercept &&
                        form->coefficients == lg->coefficients &&
                        std::fabs(form->noise_mean) <= kMeanZeroTol * std::sqrt(form->noise_variance) &&
                        qoi_total_effects(p, qoi).has_value();
  if (gaussian) {
    report.rule = CorrectabilityCase::gaussian_mean_zero;
    for (Vertex v : closure) {
      if (v != ls) report.unchanged.push_back(v);
    }
    for (Vertex v : closure) add_entry(v);
    return report;
  }
  report.rule = CorrectabilityCase::general_descendants;
  const auto below = descendants(p.graph(), ls);
  for (Vertex v : closure) {
    if (v == ls) continue;
    if (std::binary_search(below.begin(), below.end(), v)) {
      report.recheck.push_back(v);
    } else {
      report.unchanged.push_back(v);
    }
  }
  if (std::binary_search(closure.begin(), closure.end(), ls)) add_entry(ls);
  for (Vertex v : report.recheck) add_entry(v);
  return report;
}

}  // namespace bnuq
