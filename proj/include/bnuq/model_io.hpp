#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnuq/model.hpp"
#include "bnuq/qoi.hpp"

namespace bnuq {

struct BudgetSpec {
  std::optional<double> eta;
  std::optional<std::string> data_file;  // CSV of residuals, first column
};

struct McSpec {
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> outer;
  std::optional<std::size_t> inner;

  friend bool operator==(const McSpec&, const McSpec&) = default;
};

// JSON model file, "version": "1". Schema in docs/model_format.md.
struct ModelDocument {
  DirectedGraphModel model;
  std::optional<QuantityOfInterest> qoi;
  std::map<std::string, BudgetSpec> budgets;
  McSpec mc;
};

// Throws SyntaxError (position = byte offset), UnknownCpdKind, UnresolvedParent,
// CycleDetected, InvalidData.
ModelDocument parse_model(std::string_view text);
std::string serialize_model(const ModelDocument& doc);
ModelDocument load_model_file(const std::string& path);

std::string read_text_file(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Header row, numeric cells, '.' decimal. Missing or malformed cells raise
// InvalidData with the 1-based data row number as position.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

}  // namespace bnuq
