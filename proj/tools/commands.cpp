#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnuq/catalog.hpp"
#include "bnuq/error.hpp"
#include "bnuq/model_io.hpp"
#include "bnuq/workflow.hpp"

namespace bnuq::cli {
namespace {

using json = nlohmann::json;

// Bad command-line input; reported like a library error but exits with 2.
struct UsageError : Error {
  explicit UsageError(const std::string& message) : Error(ErrorCode::InvalidArgument, message) {}
};

struct Options {
  std::string model;
  std::string qoi;
  double eta = 0.0;
  std::string eta_file;
  double eta_uniform = 0.0;
  std::uint64_t seed = 1;
  std::size_t samples = 0;
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::string out;
  int threads = 0;
  double tol = 0.0;
  std::string tol_mode = "relative";
  std::string set = "free";
  std::string backend = "auto";
  bool jensen = false;

  std::vector<std::string> vertices;
  std::string name;
  std::string data;
  std::string replace;
  double eta_max = 1.0;
  std::size_t points = 11;

  CLI::Option* eta_opt = nullptr;
  CLI::Option* eta_uniform_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* outer_opt = nullptr;
  CLI::Option* inner_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw UsageError(what + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Loaded {
  ModelDocument doc;
  std::vector<std::pair<std::string, QuantityOfInterest>> named;
  std::filesystem::path base;
};

Loaded load(const std::string& spec) {
  if (spec.empty()) throw UsageError("--model is required");
  Loaded l;
  if (std::filesystem::is_regular_file(spec)) {
    l.doc = load_model_file(spec);
    l.base = std::filesystem::path(spec).parent_path();
    return l;
  }
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), spec) == names.end()) {
    throw Error(ErrorCode::IoError, "no model file or preset named '" + spec + "'");
  }
  auto cm = preset(spec);
  for (auto& [name, q] : cm.qois) q.set_name(name);
  l.doc.model = std::move(cm.model);
  l.doc.qoi = cm.qois.front().second;
  l.named = std::move(cm.qois);
  return l;
}

ModelDocument preset_document(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw UsageError("unknown preset '" + name + "'");
  }
  return load(name).doc;
}

bool has_label(const DirectedGraph& g, const std::string& s) {
  const auto& ls = g.labels();
  return std::find(ls.begin(), ls.end(), s) != ls.end();
}

QuantityOfInterest resolve_qoi(const Loaded& l, const std::string& text) {
  const auto& g = l.doc.model.graph();
  if (text.empty()) {
    if (!l.doc.qoi) throw UsageError("the model declares no QoI; pass --qoi");
    return *l.doc.qoi;
  }
  for (const auto& [name, q] : l.named) {
    if (name == text) return q;
  }
  if (l.doc.qoi && l.doc.qoi->name() == text) return *l.doc.qoi;
  if (has_label(g, text)) return QuantityOfInterest(AffineQoi{g.find(text), 1.0, 0.0}, text);
  auto q = QuantityOfInterest::expression(Expression::parse(text), g);
  q.set_name(text);
  return q;
}

std::string qoi_label(const QuantityOfInterest& q, const DirectedGraph& g) {
  if (!q.name().empty()) return q.name();
  if (const auto* e = std::get_if<ExpressionQoi>(&q.form())) return e->expression.text();
  if (const auto* a = q.as_affine()) return g.label(a->vertex);
  return "qoi";
}

McConfig make_config(const Options& o, const ModelDocument& doc) {
  McConfig cfg;
  if (doc.mc.samples) cfg.samples = *doc.mc.samples;
  if (doc.mc.seed) cfg.seed = *doc.mc.seed;
  if (doc.mc.outer) cfg.outer = *doc.mc.outer;
  if (doc.mc.inner) cfg.inner = *doc.mc.inner;
  if (given(o.samples_opt)) cfg.samples = o.samples;
  if (given(o.seed_opt)) cfg.seed = o.seed;
  if (given(o.outer_opt)) cfg.outer = o.outer;
  if (given(o.inner_opt)) cfg.inner = o.inner;
  if (o.backend == "auto") {
    cfg.backend = BackendChoice::automatic;
  } else if (o.backend == "closed_form") {
    cfg.backend = BackendChoice::closed_form;
  } else if (o.backend == "monte_carlo") {
    cfg.backend = BackendChoice::monte_carlo;
  } else {
    throw UsageError("unknown backend '" + o.backend + "'");
  }
  cfg.jensen = o.jensen;
  return cfg;
}

AmbiguityKind parse_set(const std::string& s) {
  if (s == "free") return AmbiguityKind::vertex_free_parents;
  if (s == "fixed") return AmbiguityKind::vertex_fixed_parents;
  throw UsageError("--set must be 'free' or 'fixed'");
}

TolMode parse_tol_mode(const std::string& s) {
  if (s == "relative") return TolMode::relative;
  if (s == "absolute") return TolMode::absolute;
  throw UsageError("--tol-mode must be 'relative' or 'absolute'");
}

json read_json_file(const std::string& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, path + ": " + e.what(), e.byte);
  }
}

std::vector<double> first_column(const std::string& path) {
  const auto table = read_csv(path);
  return table.columns.front();
}

MisspecificationBudget resolve_budget(const Options& o, const Loaded& l) {
  const auto& m = l.doc.model;
  if (given(o.eta_uniform_opt)) return uniform_budget(m, o.eta_uniform);
  if (given(o.eta_opt)) return uniform_budget(m, o.eta);
  const auto& g = m.graph();
  std::map<Vertex, double> overrides;
  std::map<Vertex, std::vector<double>> residuals;
  for (const auto& [name, spec] : l.doc.budgets) {
    const Vertex v = g.find(name);
    if (spec.eta) {
      overrides[v] = *spec.eta;
    } else if (spec.data_file) {
      residuals[v] = first_column((l.base / *spec.data_file).string());
    }
  }
  if (!o.eta_file.empty()) {
    const auto j = read_json_file(o.eta_file);
    if (!j.is_object()) throw Error(ErrorCode::InvalidData, "--eta-file must hold an object of vertex budgets");
    for (const auto& [name, value] : j.items()) {
      if (!value.is_number()) throw Error(ErrorCode::InvalidData, "budget for " + name + " is not a number");
      overrides[g.find(name)] = value.get<double>();
    }
  }
  return build_budget(m, residuals, overrides);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json index_json(const DirectedGraphModel& m, const IndexResult& r) {
  json j;
  j["vertex"] = r.vertex ? json(m.graph().label(*r.vertex)) : json(nullptr);
  j["eta"] = r.eta;
  j["i_plus"] = r.plus.value;
  j["i_minus"] = r.minus.value;
  j["tight"] = r.tight;
  j["backend"] = to_string(r.backend);
  j["kind"] = to_string(r.kind);
  j["jensen"] = r.jensen;
  j["share"] = nullptr;
  j["boundary_plus"] = to_string(r.plus.boundary);
  j["boundary_minus"] = to_string(r.minus.boundary);
  j["lower_bound"] = r.plus.lower_bound || r.minus.lower_bound;
  j["diagnostics"] = r.diagnostics;
  return j;
}

void add_assessment(json& entry, const Options& o, double index, const std::optional<double>& mean) {
  if (!given(o.tol_opt)) return;
  const auto mode = parse_tol_mode(o.tol_mode);
  if (mode == TolMode::relative && !mean) {
    throw Error(ErrorCode::ZeroMeanRelative, "relative assessment needs the QoI mean");
  }
  const auto a = assess(index, mean.value_or(0.0), o.tol, mode);
  entry["assessment"] = {{"pass", a.pass}, {"ratio", a.ratio}, {"tol", a.tol}, {"mode", to_string(a.mode)}};
}

std::optional<double> try_mean(const DirectedGraphModel& m, const QuantityOfInterest& q, const McConfig& cfg,
                               std::vector<std::string>& diagnostics) {
  try {
    return qoi_mean(m, q, cfg);
  } catch (const Error& e) {
    diagnostics.push_back(std::string("qoi_mean unavailable: ") + e.what());
    return std::nullopt;
  }
}

json report_header(const std::string& command, const Loaded& l, const QuantityOfInterest& q, const McConfig& cfg) {
  json r;
  r["command"] = command;
  r["qoi"] = qoi_label(q, l.doc.model.graph());
  r["mc"] = {{"samples", cfg.samples}, {"seed", cfg.seed}, {"outer", cfg.outer}, {"inner", cfg.inner},
             {"jensen", cfg.jensen}};
  return r;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + o.out);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + o.out);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string cmd_index(const Options& o) {
  const auto l = load(o.model);
  const auto q = resolve_qoi(l, o.qoi);
  const auto cfg = make_config(o, l.doc);
  double eta = 0.0;
  if (given(o.eta_opt)) {
    eta = o.eta;
  } else if (given(o.eta_uniform_opt)) {
    eta = o.eta_uniform;
  } else {
    throw Error(ErrorCode::MissingBudget, "index needs --eta");
  }
  auto r = report_header("index", l, q, cfg);
  std::vector<std::string> diagnostics;
  const auto mean = try_mean(l.doc.model, q, cfg, diagnostics);
  const auto res = model_uncertainty_index(l.doc.model, q, eta, cfg);
  auto e = index_json(l.doc.model, res);
  add_assessment(e, o, res.plus.value, mean);
  r["qoi_mean"] = optional_number(mean);
  r["indices"] = json::array({e});
  r["diagnostics"] = diagnostics;
  return dump(r);
}

std::string cmd_sensitivity(const Options& o) {
  const auto l = load(o.model);
  const auto q = resolve_qoi(l, o.qoi);
  const auto cfg = make_config(o, l.doc);
  const auto set = parse_set(o.set);
  const auto budget = resolve_budget(o, l);
  auto r = report_header("sensitivity", l, q, cfg);
  std::vector<std::string> diagnostics;
  const auto mean = try_mean(l.doc.model, q, cfg, diagnostics);
  json entries = json::array();
  for (const auto& name : o.vertices) {
    const Vertex v = l.doc.model.graph().find(name);
    const auto res = sensitivity_index(l.doc.model, q, v, budget.eta(v), set, cfg);
    auto e = index_json(l.doc.model, res);
    add_assessment(e, o, res.plus.value, mean);
    entries.push_back(std::move(e));
  }
  r["qoi_mean"] = optional_number(mean);
  r["indices"] = std::move(entries);
  r["diagnostics"] = diagnostics;
  return dump(r);
}

std::string cmd_rank(const Options& o) {
  const auto l = load(o.model);
  const auto q = resolve_qoi(l, o.qoi);
  const auto cfg = make_config(o, l.doc);
  const auto budget = resolve_budget(o, l);
  const auto report = rank_components(l.doc.model, q, budget, cfg, parse_set(o.set));
  auto r = report_header("rank", l, q, cfg);
  std::vector<std::string> diagnostics;
  if (report.degenerate) diagnostics.push_back("all indices are zero; shares are reported as 0");
  json entries = json::array();
  for (const auto& re : report.entries) {
    auto e = index_json(l.doc.model, re.index);
    e["vertex"] = l.doc.model.graph().label(re.vertex);
    e["eta"] = re.eta;
    e["share"] = re.share;
    e["relative"] = optional_number(re.relative);
    e["budget_source"] = to_string(budget.entries.at(re.vertex).source);
    if (re.error) {
      e["error"] = *re.error;
    } else {
      add_assessment(e, o, re.index.plus.value, report.qoi_mean);
    }
    entries.push_back(std::move(e));
  }
  r["qoi_mean"] = optional_number(report.qoi_mean);
  r["degenerate"] = report.degenerate;
  r["indices"] = std::move(entries);
  r["diagnostics"] = diagnostics;
  return dump(r);
}

std::vector<double> stress_grid(const Options& o) {
  std::vector<double> etas;
  if (!o.eta_file.empty()) {
    const auto j = read_json_file(o.eta_file);
    if (!j.is_array()) throw Error(ErrorCode::InvalidData, "stress --eta-file must hold an array of eta values");
    for (const auto& v : j) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidData, "eta grid entries must be numbers");
      etas.push_back(v.get<double>());
    }
    return etas;
  }
  if (o.points < 2) throw UsageError("--points must be at least 2");
  for (std::size_t i = 0; i < o.points; ++i) {
    etas.push_back(o.eta_max * static_cast<double>(i) / static_cast<double>(o.points - 1));
  }
  return etas;
}

std::string cmd_stress(const Options& o) {
  const auto l = load(o.model);
  const auto q = resolve_qoi(l, o.qoi);
  const auto cfg = make_config(o, l.doc);
  const auto etas = stress_grid(o);
  std::vector<std::string> header = {"eta"};
  std::vector<std::vector<IndexResult>> curves;
  if (o.vertices.empty()) {
    header.push_back("i_plus");
    header.push_back("i_minus");
    curves.push_back(model_uncertainty_sweep(l.doc.model, q, etas, cfg));
  } else {
    const auto set = parse_set(o.set);
    for (const auto& name : o.vertices) {
      header.push_back(name + "_i_plus");
      header.push_back(name + "_i_minus");
      curves.push_back(sensitivity_sweep(l.doc.model, q, l.doc.model.graph().find(name), etas, set, cfg));
    }
  }
  std::ostringstream csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
  csv << "\n";
  for (std::size_t e = 0; e < etas.size(); ++e) {
    csv << format_double(etas[e]);
    for (const auto& c : curves) csv << "," << format_double(c[e].plus.value) << "," << format_double(c[e].minus.value);
    csv << "\n";
  }
  return csv.str();
}

std::string cmd_fit(const Options& o) {
  if (o.data.empty()) throw UsageError("fit needs --data");
  auto l = load(o.model);
  const auto& g = l.doc.model.graph();
  const auto table = read_csv(o.data);
  SampleMatrix data(table.rows(), g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto& col = table.column(g.label(v));
    for (std::size_t i = 0; i < col.size(); ++i) data.at(i, v) = col[i];
  }
  l.doc.model = fit_linear_gaussian_mle(data, g);
  return serialize_model(l.doc);
}

std::vector<double> centered(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::EmptyData, "residual file has no rows");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

// v=kde:file.csv[:bandwidth] | v=hist:file.csv:bins | v=points:x@p,x@p,...
std::pair<Vertex, ConditionalDensity> parse_replacement(const std::string& spec, const DirectedGraphModel& m) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw UsageError("--replace expects vertex=kind:args");
  const Vertex v = m.graph().find(spec.substr(0, eq));
  const auto parts = split(spec.substr(eq + 1), ':');
  const auto form = linear_form(m.cpd(v));
  if (!form) {
    throw Error(ErrorCode::UnsupportedCPDFamily, "replacement needs a vertex with a linear mean function");
  }
  AdditiveNoiseCPD cpd{form->intercept, form->coefficients, {}};
  const auto& kind = parts.front();
  if (kind == "kde" && (parts.size() == 2 || parts.size() == 3)) {
    const auto r = centered(first_column(parts[1]));
    std::optional<double> bw;
    if (parts.size() == 3) bw = parse_double(parts[2], "bandwidth");
    cpd.noise = fit_kde(r, bw);
  } else if (kind == "hist" && parts.size() == 3) {
    const auto bins = parse_double(parts[2], "bin count");
    if (!(bins >= 1.0) || bins != std::floor(bins)) throw UsageError("bad bin count");
    cpd.noise = fit_histogram(centered(first_column(parts[1])), static_cast<std::size_t>(bins));
  } else if (kind == "points" && parts.size() == 2) {
    PointMassDensity pm;
    for (const auto& item : split(parts[1], ',')) {
      const auto at = item.find('@');
      if (at == std::string::npos) throw UsageError("point masses are written x@p");
      pm.points.push_back(parse_double(std::string_view(item).substr(0, at), "point"));
      pm.probs.push_back(parse_double(std::string_view(item).substr(at + 1), "probability"));
    }
    cpd.noise = std::move(pm);
  } else {
    throw UsageError("unrecognised replacement '" + spec.substr(eq + 1) + "'");
  }
  validate_cpd(cpd);
  return {v, std::move(cpd)};
}

json labels(const DirectedGraphModel& m, const std::vector<Vertex>& vs) {
  json j = json::array();
  for (Vertex v : vs) j.push_back(m.graph().label(v));
  return j;
}

std::string cmd_correct_check(const Options& o) {
  if (o.replace.empty()) throw UsageError("correct-check needs --replace");
  const auto l = load(o.model);
  const auto q = resolve_qoi(l, o.qoi);
  const auto cfg = make_config(o, l.doc);
  const auto budget = resolve_budget(o, l);
  const auto& p = l.doc.model;
  auto [v, cpd] = parse_replacement(o.replace, p);
  const auto p_tilde = p.with_cpd(v, std::move(cpd));
  const auto report = correctability_check(p, p_tilde, q, budget, cfg, parse_set(o.set));
  auto r = report_header("correct-check", l, q, cfg);
  json entries = json::array();
  for (const auto& ce : report.entries) {
    auto e = index_json(p_tilde, ce.after);
    e["i_plus_before"] = ce.before.plus.value;
    e["i_minus_before"] = ce.before.minus.value;
    e["delta"] = ce.delta;
    e["relative"] = optional_number(ce.relative_after);
    e["relative_before"] = optional_number(ce.relative_before);
    add_assessment(e, o, ce.after.plus.value, report.mean_after);
    entries.push_back(std::move(e));
  }
  r["qoi_mean"] = optional_number(report.mean_before);
  r["qoi_mean_after"] = optional_number(report.mean_after);
  r["corrected"] = report.corrected ? json(p.graph().label(*report.corrected)) : json(nullptr);
  r["rule"] = to_string(report.rule);
  r["unchanged"] = labels(p, report.unchanged);
  r["recheck"] = labels(p, report.recheck);
  r["indices"] = std::move(entries);
  r["diagnostics"] = json::array();
  return dump(r);
}

std::string cmd_catalog(const Options& o) {
  if (o.name.empty()) return dump(json{{"presets", preset_names()}});
  return serialize_model(preset_document(o.name));
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Model uncertainty and sensitivity indices for Bayesian networks", "bnuq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--model", o.model, "Model JSON file or preset name");
  app.add_option("--qoi", o.qoi, "QoI name, vertex name or expression");
  o.eta_opt = app.add_option("--eta", o.eta, "KL budget applied to every vertex");
  app.add_option("--eta-file", o.eta_file, "JSON budgets {vertex: eta}; an array of etas for stress");
  o.eta_uniform_opt = app.add_option("--eta-uniform", o.eta_uniform, "Same budget for every stochastic vertex");
  o.seed_opt = app.add_option("--seed", o.seed, "Random seed");
  o.samples_opt = app.add_option("--samples", o.samples, "Monte Carlo samples");
  o.outer_opt = app.add_option("--outer", o.outer, "Outer samples of nested sensitivity estimates");
  o.inner_opt = app.add_option("--inner", o.inner, "Inner samples of nested sensitivity estimates");
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--threads", o.threads, "Thread cap")->check(CLI::NonNegativeNumber);
  o.tol_opt = app.add_option("--tol", o.tol, "Tolerance for pass/fail assessment");
  app.add_option("--tol-mode", o.tol_mode, "relative or absolute")->check(CLI::IsMember({"relative", "absolute"}));
  app.add_option("--set", o.set, "Per-vertex ambiguity set: free or fixed")->check(CLI::IsMember({"free", "fixed"}));
  app.add_option("--backend", o.backend, "auto, closed_form or monte_carlo")
      ->check(CLI::IsMember({"auto", "closed_form", "monte_carlo"}));
  app.add_flag("--jensen", o.jensen, "Pooled mixture estimate for per-vertex indices");

  auto* index = app.add_subcommand("index", "Whole-model uncertainty index");
  auto* sensitivity = app.add_subcommand("sensitivity", "Per-vertex sensitivity indices");
  sensitivity->add_option("--vertex", o.vertices, "Perturbed vertex (repeatable)")->required();
  auto* rank = app.add_subcommand("rank", "Rank vertices by sensitivity index");
  auto* stress = app.add_subcommand("stress", "CSV curve of the indices over an eta grid");
  stress->add_option("--vertex", o.vertices, "Perturbed vertex (repeatable); whole model if absent");
  stress->add_option("--eta-max", o.eta_max, "Largest eta of the grid")->check(CLI::NonNegativeNumber);
  stress->add_option("--points", o.points, "Grid points from 0 to --eta-max");
  auto* fit = app.add_subcommand("fit", "Linear-Gaussian MLE of the model structure from CSV data");
  fit->add_option("--data", o.data, "CSV with one column per vertex")->required();
  auto* correct = app.add_subcommand("correct-check", "Correctability report for one replaced CPD");
  correct->add_option("--replace", o.replace, "vertex=kde:file.csv[:bw] | hist:file.csv:bins | points:x@p,...")
      ->required();
  auto* catalog = app.add_subcommand("catalog", "List presets or emit one as a model file");
  catalog->add_option("--name", o.name, "Preset name");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << json{{"error", {{"code", "InvalidArgument"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    if (o.threads > 0) set_thread_count(o.threads);
    std::string text;
    if (index->parsed()) text = cmd_index(o);
    if (sensitivity->parsed()) text = cmd_sensitivity(o);
    if (rank->parsed()) text = cmd_rank(o);
    if (stress->parsed()) text = cmd_stress(o);
    if (fit->parsed()) text = cmd_fit(o);
    if (correct->parsed()) text = cmd_correct_check(o);
    if (catalog->parsed()) text = cmd_catalog(o);
    emit(o, text, out);
    return 0;
  } catch (const UsageError& e) {
    err << json{{"error", {{"code", "InvalidArgument"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    json body = {{"code", to_string(e.code())}, {"message", e.what()}};
    if (e.position()) body["position"] = *e.position();
    err << json{{"error", body}}.dump() << "\n";
  } catch (const std::exception& e) {
    err << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
  }
  return 1;
}

}  // namespace bnuq::cli
