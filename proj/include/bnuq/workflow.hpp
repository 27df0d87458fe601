#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnuq/divergences.hpp"
#include "bnuq/indices.hpp"

namespace bnuq {

enum class BudgetSource { data_estimated, user_set };
const char* to_string(BudgetSource s);

struct BudgetEntry {
  double eta = 0.0;
  BudgetSource source = BudgetSource::user_set;
  bool saturated = false;  // data density has mass where the baseline has none
};

struct MisspecificationBudget {
  std::map<Vertex, BudgetEntry> entries;

  bool contains(Vertex v) const { return entries.count(v) != 0; }
  // Throws MissingBudget.
  double eta(Vertex v) const;
};

// Residual samples per vertex are scored with eta_from_samples; overrides win.
// Deterministic vertices are skipped.
MisspecificationBudget build_budget(const DirectedGraphModel& model,
                                    const std::map<Vertex, std::vector<double>>& residuals,
                                    const std::map<Vertex, double>& overrides,
                                    const DensityModel& density = {});
MisspecificationBudget uniform_budget(const DirectedGraphModel& model, double eta);

struct RankingEntry {
  Vertex vertex = 0;
  double eta = 0.0;
  IndexResult index;
  double share = 0.0;
  std::optional<double> relative;  // I+ / |E_P f|
  std::optional<std::string> error;
};

struct RankingReport {
  std::vector<RankingEntry> entries;  // descending I+, ties by vertex id
  std::optional<double> qoi_mean;
  bool degenerate = false;  // all indices zero
};

RankingReport rank_components(const DirectedGraphModel& model, const QuantityOfInterest& qoi,
                              const MisspecificationBudget& budget, const McConfig& cfg = {},
                              AmbiguityKind set = AmbiguityKind::vertex_free_parents);

enum class TolMode { absolute, relative };
const char* to_string(TolMode m);

struct Assessment {
  bool pass = false;
  double ratio = 0.0;  // the compared quantity
  TolMode mode = TolMode::relative;
  double tol = 0.0;
};

Assessment assess(double index, double qoi_mean, double tol, TolMode mode = TolMode::relative);

enum class CorrectabilityCase { identical, gaussian_mean_zero, general_descendants };
const char* to_string(CorrectabilityCase c);

struct CorrectabilityEntry {
  Vertex vertex = 0;
  double eta = 0.0;
  IndexResult before;
  IndexResult after;
  double delta = 0.0;
  std::optional<double> relative_before;
  std::optional<double> relative_after;
};

struct CorrectabilityReport {
  std::optional<Vertex> corrected;
  std::vector<Vertex> unchanged;
  std::vector<Vertex> recheck;
  std::vector<CorrectabilityEntry> entries;
  CorrectabilityCase rule = CorrectabilityCase::identical;
  std::optional<double> mean_before;
  std::optional<double> mean_after;
};

// P and P-tilde must share the graph and differ in at most one CPD.
CorrectabilityReport correctability_check(const DirectedGraphModel& p, const DirectedGraphModel& p_tilde,
                                          const QuantityOfInterest& qoi, const MisspecificationBudget& budget,
                                          const McConfig& cfg = {},
                                          AmbiguityKind set = AmbiguityKind::vertex_free_parents);

// after.plus - before.plus; negative is an improvement.
double improvement_delta(const IndexResult& before, const IndexResult& after);

}  // namespace bnuq
