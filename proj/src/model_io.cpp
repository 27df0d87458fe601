#include "bnuq/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "bnuq/error.hpp"
#include "json.hpp"

namespace bnuq {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidData, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    bad(where, std::string("missing field '") + key + "'");
  }
  if (!it->is_number()) bad(where, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::vector<double> numbers(const json& obj, const char* key, const std::string& where, bool optional = false) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (optional) return {};
    bad(where, std::string("missing field '") + key + "'");
  }
  if (!it->is_array()) bad(where, std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) bad(where, std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <class T>
std::vector<T> unsigned_list(const std::vector<double>& v, const std::string& where) {
  std::vector<T> out;
  for (double x : v) {
    if (!(x >= 0.0) || x != std::floor(x)) bad(where, "expected nonnegative integers");
    out.push_back(static_cast<T>(x));
  }
  return out;
}

struct RawVertex {
  std::string name;
  std::vector<std::string> parents;
  json cpd;
};

ConditionalDensity parse_cpd(const RawVertex& rv, const std::vector<std::size_t>& parent_cards,
                             const std::string& where) {
  if (!rv.cpd.is_object()) bad(where, "cpd must be an object");
  const auto kind_it = rv.cpd.find("kind");
  if (kind_it == rv.cpd.end() || !kind_it->is_string()) bad(where, "cpd needs a string 'kind'");
  const std::string kind = kind_it->get<std::string>();
  const auto& c = rv.cpd;
  if (kind == "linear_gaussian") {
    return LinearGaussianCPD{number(c, "intercept", where, 0.0), numbers(c, "coefficients", where, true),
                             number(c, "sd", where)};
  }
  if (kind == "gamma") return GammaCPD{number(c, "shape", where), number(c, "scale", where)};
  if (kind == "deterministic") {
    const auto& e = field(c, "expression", where);
    if (!e.is_string()) bad(where, "expression must be a string");
    return DeterministicCPD::bind(Expression::parse(e.get<std::string>()), rv.parents);
  }
  if (kind == "histogram" || kind == "kde" || kind == "point_mass") {
    AdditiveNoiseCPD a;
    a.intercept = number(c, "intercept", where, 0.0);
    a.coefficients = numbers(c, "coefficients", where, true);
    if (kind == "histogram") {
      HistogramDensity h;
      h.edges = numbers(c, "edges", where);
      h.counts = unsigned_list<std::uint64_t>(numbers(c, "counts", where), where);
      for (auto n : h.counts) h.total += n;
      a.noise = std::move(h);
    } else if (kind == "kde") {
      a.noise = KernelDensity{numbers(c, "points", where), number(c, "bandwidth", where)};
    } else {
      a.noise = PointMassDensity{numbers(c, "points", where), numbers(c, "probs", where)};
    }
    return a;
  }
  if (kind == "discrete") {
    FiniteDiscreteCPD d;
    d.cardinality = static_cast<std::size_t>(number(c, "cardinality", where));
    if (c.contains("parent_cardinalities")) {
      d.parent_cardinalities = unsigned_list<std::size_t>(numbers(c, "parent_cardinalities", where), where);
    } else {
      d.parent_cardinalities = parent_cards;
    }
    const auto& t = field(c, "table", where);
    if (!t.is_array()) bad(where, "table must be an array of rows");
    for (const auto& row : t) {
      if (!row.is_array() || row.size() != d.cardinality) bad(where, "each table row needs cardinality entries");
      for (const auto& p : row) {
        if (!p.is_number()) bad(where, "table entries must be numbers");
        d.table.push_back(p.get<double>());
      }
    }
    return d;
  }
  throw Error(ErrorCode::UnknownCpdKind, where + ": unknown cpd kind '" + kind + "'");
}

json cpd_json(const ConditionalDensity& cpd) {
  json j;
  j["kind"] = cpd_kind(cpd);
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LinearGaussianCPD>) {
          j["intercept"] = c.intercept;
          j["coefficients"] = c.coefficients;
          j["sd"] = c.noise_sd;
        } else if constexpr (std::is_same_v<T, GammaCPD>) {
          j["shape"] = c.shape;
          j["scale"] = c.scale;
        } else if constexpr (std::is_same_v<T, DeterministicCPD>) {
          j["expression"] = c.expression.text();
        } else if constexpr (std::is_same_v<T, AdditiveNoiseCPD>) {
          j["intercept"] = c.intercept;
          j["coefficients"] = c.coefficients;
          std::visit(
              [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, HistogramDensity>) {
                  j["edges"] = n.edges;
                  j["counts"] = n.counts;
                } else if constexpr (std::is_same_v<N, KernelDensity>) {
                  j["points"] = n.points;
                  j["bandwidth"] = n.bandwidth;
                } else {
                  j["points"] = n.points;
                  j["probs"] = n.probs;
                }
              },
              c.noise);
        } else {
          j["cardinality"] = c.cardinality;
          j["parent_cardinalities"] = c.parent_cardinalities;
          json rows = json::array();
          for (std::size_t r = 0; r < c.rows(); ++r) {
            rows.push_back(std::vector<double>(c.table.begin() + static_cast<std::ptrdiff_t>(r * c.cardinality),
                                               c.table.begin() + static_cast<std::ptrdiff_t>((r + 1) * c.cardinality)));
          }
          j["table"] = std::move(rows);
        }
      },
      cpd);
  return j;
}

std::string text_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) bad(where, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

QuantityOfInterest parse_qoi(const json& q, const DirectedGraph& g) {
  const std::string where = "qoi";
  if (!q.is_object()) bad(where, "qoi must be an object");
  QuantityOfInterest out;
  if (q.contains("vertex")) {
    out = QuantityOfInterest::affine(g.find(text_field(q, "vertex", where)), number(q, "slope", where, 1.0),
                                     number(q, "offset", where, 0.0));
  } else if (q.contains("expression")) {
    out = QuantityOfInterest::expression(Expression::parse(text_field(q, "expression", where)), g);
  } else if (q.contains("crossing")) {
    const auto& c = q["crossing"];
    out = QuantityOfInterest::crossing(g.find(text_field(c, "first", where)), g.find(text_field(c, "second", where)),
                                       g.find(text_field(c, "pivot", where)));
  } else {
    bad(where, "qoi needs 'vertex', 'expression' or 'crossing'");
  }
  if (q.contains("name")) out.set_name(text_field(q, "name", where));
  return out;
}

json qoi_json(const QuantityOfInterest& q, const DirectedGraph& g) {
  json j;
  if (const auto* a = q.as_affine()) {
    j["vertex"] = g.label(a->vertex);
    j["slope"] = a->slope;
    j["offset"] = a->offset;
  } else if (const auto* c = q.as_crossing()) {
    j["crossing"] = {{"first", g.label(c->first)}, {"second", g.label(c->second)}, {"pivot", g.label(c->pivot)}};
  } else {
    j["expression"] = std::get<ExpressionQoi>(q.form()).expression.text();
  }
  if (!q.name().empty()) j["name"] = q.name();
  return j;
}

}  // namespace

ModelDocument parse_model(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::SyntaxError,
                "JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col),
                e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!root.is_object()) bad("document", "top level must be an object");
  const auto ver = root.find("version");
  if (ver == root.end() || !ver->is_string() || ver->get<std::string>() != "1") {
    bad("document", "expected \"version\": \"1\"");
  }
  const auto& vs = field(root, "vertices", "document");
  if (!vs.is_array() || vs.empty()) bad("document", "vertices must be a nonempty array");

  std::vector<RawVertex> raw;
  std::unordered_map<std::string, Vertex> index;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    const auto& v = vs[i];
    if (!v.is_object()) bad(where, "vertex must be an object");
    RawVertex rv;
    rv.name = text_field(v, "name", where);
    if (v.contains("parents")) {
      if (!v["parents"].is_array()) bad(where, "parents must be an array of names");
      for (const auto& p : v["parents"]) {
        if (!p.is_string()) bad(where, "parents must be an array of names");
        rv.parents.push_back(p.get<std::string>());
      }
    }
    rv.cpd = field(v, "cpd", where);
    if (!index.emplace(rv.name, i).second) bad(where, "duplicate vertex name '" + rv.name + "'");
    raw.push_back(std::move(rv));
  }
  std::vector<std::vector<Vertex>> parents(raw.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    labels.push_back(raw[i].name);
    for (const auto& p : raw[i].parents) {
      const auto it = index.find(p);
      if (it == index.end()) {
        throw Error(ErrorCode::UnresolvedParent,
                    "vertices[" + std::to_string(i) + "] (" + raw[i].name + "): undeclared parent '" + p + "'", i);
      }
      parents[i].push_back(it->second);
    }
  }
  DirectedGraph graph(parents, labels);
  topological_order(graph);

  std::vector<ConditionalDensity> cpds;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::vector<std::size_t> cards;
    for (Vertex p : parents[i]) {
      const auto& pc = raw[p].cpd;
      cards.push_back(pc.is_object() && pc.contains("cardinality") && pc["cardinality"].is_number()
                          ? pc["cardinality"].get<std::size_t>()
                          : 0);
    }
    cpds.push_back(parse_cpd(raw[i], cards, "vertices[" + std::to_string(i) + "] (" + raw[i].name + ")"));
  }

  ModelDocument doc;
  doc.model = DirectedGraphModel(std::move(graph), std::move(cpds));
  if (root.contains("qoi")) doc.qoi = parse_qoi(root["qoi"], doc.model.graph());
  if (root.contains("budgets")) {
    const auto& b = root["budgets"];
    if (!b.is_object()) bad("budgets", "must be an object keyed by vertex name");
    for (const auto& [name, spec] : b.items()) {
      doc.model.graph().find(name);
      BudgetSpec s;
      if (spec.is_number()) {
        s.eta = spec.get<double>();
      } else if (spec.is_object()) {
        if (spec.contains("eta")) s.eta = number(spec, "eta", "budgets." + name);
        if (spec.contains("data")) s.data_file = text_field(spec, "data", "budgets." + name);
      } else {
        bad("budgets." + name, "expected a number or an object");
      }
      doc.budgets[name] = s;
    }
  }
  if (root.contains("mc")) {
    const auto& m = root["mc"];
    if (!m.is_object()) bad("mc", "must be an object");
    const auto count = [&](const char* key) -> std::optional<std::size_t> {
      if (!m.contains(key)) return std::nullopt;
      return unsigned_list<std::size_t>({number(m, key, "mc")}, "mc").front();
    };
    doc.mc.samples = count("samples");
    doc.mc.outer = count("outer");
    doc.mc.inner = count("inner");
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned()) bad("mc", "seed must be a nonnegative integer");
      doc.mc.seed = m["seed"].get<std::uint64_t>();
    }
  }
  return doc;
}

std::string serialize_model(const ModelDocument& doc) {
  const auto& g = doc.model.graph();
  json root;
  root["version"] = "1";
  json vs = json::array();
  for (Vertex v = 0; v < doc.model.size(); ++v) {
    json jv;
    jv["name"] = g.label(v);
    json ps = json::array();
    for (Vertex p : g.parents(v)) ps.push_back(g.label(p));
    jv["parents"] = std::move(ps);
    jv["cpd"] = cpd_json(doc.model.cpd(v));
    vs.push_back(std::move(jv));
  }
  root["vertices"] = std::move(vs);
  if (doc.qoi) root["qoi"] = qoi_json(*doc.qoi, g);
  if (!doc.budgets.empty()) {
    json b = json::object();
    for (const auto& [name, s] : doc.budgets) {
      json e = json::object();
      if (s.eta) e["eta"] = *s.eta;
      if (s.data_file) e["data"] = *s.data_file;
      b[name] = std::move(e);
    }
    root["budgets"] = std::move(b);
  }
  json m = json::object();
  if (doc.mc.samples) m["samples"] = *doc.mc.samples;
  if (doc.mc.seed) m["seed"] = *doc.mc.seed;
  if (doc.mc.outer) m["outer"] = *doc.mc.outer;
  if (doc.mc.inner) m["inner"] = *doc.mc.inner;
  if (!m.empty()) root["mc"] = std::move(m);
  return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelDocument load_model_file(const std::string& path) { return parse_model(read_text_file(path)); }

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return columns[i];
  }
  throw Error(ErrorCode::InvalidData, "CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    out.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::EmptyData, "CSV has no header");
  CsvTable t;
  for (auto h : split_cells(lines.front())) t.header.emplace_back(h);
  t.columns.resize(t.header.size());
  if (lines.size() == 1) throw Error(ErrorCode::EmptyData, "CSV has no data rows");
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_cells(lines[r]);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::InvalidData, "row " + std::to_string(r) + ": expected " + std::to_string(t.header.size()) +
                                              " cells, found " + std::to_string(cells.size()), r);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != last) {
        throw Error(ErrorCode::InvalidData, "row " + std::to_string(r) + ", column " + t.header[c] +
                                                ": missing or non-numeric cell", r);
      }
      t.columns[c].push_back(v);
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

}  // namespace bnuq
