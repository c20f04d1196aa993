#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetscreen/error.hpp"

namespace hetscreen {

enum class CovariateKind { numeric, categorical };

inline std::string to_string(CovariateKind kind) {
  return kind == CovariateKind::numeric ? "numeric" : "categorical";
}

struct CovariateSpec {
  std::string name;
  CovariateKind kind = CovariateKind::numeric;
  std::vector<std::string> levels;  // categorical only, declared order
  std::vector<double> cut_points;   // numeric only; empty means tertiles
};

/// Two-value mapping from the arm column's text to {0, 1}.
struct ArmLabels {
  std::string control = "0";
  std::string treated = "1";
};

class CovariateSchema {
 public:
  CovariateSchema() = default;
  explicit CovariateSchema(std::vector<CovariateSpec> covariates) : covariates_(std::move(covariates)) {
    validate();
  }

  const std::vector<CovariateSpec>& covariates() const noexcept { return covariates_; }
  std::size_t size() const noexcept { return covariates_.size(); }

  const CovariateSpec* find(std::string_view name) const {
    for (const auto& c : covariates_)
      if (c.name == name) return &c;
    return nullptr;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& c : covariates_) {
      if (c.name.empty()) throw SchemaError("covariate with empty name");
      if (!seen.insert(c.name).second) throw SchemaError("duplicate covariate name '" + c.name + "'");
      if (c.kind == CovariateKind::categorical) {
        if (c.levels.size() < 2)
          throw SchemaError("categorical covariate '" + c.name + "' declares fewer than 2 levels");
        std::set<std::string> lv(c.levels.begin(), c.levels.end());
        if (lv.size() != c.levels.size())
          throw SchemaError("categorical covariate '" + c.name + "' declares duplicate levels");
      } else if (!std::is_sorted(c.cut_points.begin(), c.cut_points.end()) ||
                 std::adjacent_find(c.cut_points.begin(), c.cut_points.end()) != c.cut_points.end()) {
        throw SchemaError("cut points of '" + c.name + "' must be strictly increasing");
      }
    }
  }

 private:
  std::vector<CovariateSpec> covariates_;
};

/// Sidecar schema file contents: covariates plus optional column and arm
/// label defaults.
struct SchemaFile {
  CovariateSchema schema;
  std::optional<std::string> outcome_col;
  std::optional<std::string> arm_col;
  ArmLabels arm_labels;
  char delimiter = ',';
};

inline SchemaFile schema_from_json(const nlohmann::json& j) {
  SchemaFile out;
  try {
    std::vector<CovariateSpec> covs;
    for (const auto& c : j.at("covariates")) {
      CovariateSpec spec;
      spec.name = c.at("name").get<std::string>();
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "numeric") {
        spec.kind = CovariateKind::numeric;
        if (c.contains("cut_points")) spec.cut_points = c.at("cut_points").get<std::vector<double>>();
      } else if (kind == "categorical") {
        spec.kind = CovariateKind::categorical;
        spec.levels = c.at("levels").get<std::vector<std::string>>();
      } else {
        throw SchemaError("covariate '" + spec.name + "' has unknown kind '" + kind + "'");
      }
      covs.push_back(std::move(spec));
    }
    out.schema = CovariateSchema(std::move(covs));
    if (j.contains("outcome")) out.outcome_col = j.at("outcome").get<std::string>();
    if (j.contains("arm")) out.arm_col = j.at("arm").get<std::string>();
    if (j.contains("arm_labels")) {
      out.arm_labels.control = j.at("arm_labels").at("control").get<std::string>();
      out.arm_labels.treated = j.at("arm_labels").at("treated").get<std::string>();
    }
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d == "\\t" || d == "tab") out.delimiter = '\t';
      else if (d.size() == 1) out.delimiter = d[0];
      else throw SchemaError("delimiter must be a single character or \"tab\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
  return out;
}

inline nlohmann::ordered_json schema_to_json(const SchemaFile& file) {
  nlohmann::ordered_json j;
  if (file.outcome_col) j["outcome"] = *file.outcome_col;
  if (file.arm_col) j["arm"] = *file.arm_col;
  j["arm_labels"] = {{"control", file.arm_labels.control}, {"treated", file.arm_labels.treated}};
  j["delimiter"] = file.delimiter == '\t' ? std::string("tab") : std::string(1, file.delimiter);
  auto& covs = j["covariates"] = nlohmann::ordered_json::array();
  for (const auto& c : file.schema.covariates()) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["kind"] = to_string(c.kind);
    if (c.kind == CovariateKind::categorical) cj["levels"] = c.levels;
    else if (!c.cut_points.empty()) cj["cut_points"] = c.cut_points;
    covs.push_back(std::move(cj));
  }
  return j;
}

inline SchemaFile load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file '" + path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

/// One covariate column. Numeric columns use `numeric`; categorical columns
/// store the index into the declared level list in `codes`.
struct Column {
  CovariateSpec spec;
  std::vector<double> numeric;
  std::vector<int> codes;

  bool is_numeric() const noexcept { return spec.kind == CovariateKind::numeric; }
};

/// Immutable after construction; row order is the file order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(CovariateSchema schema, std::vector<double> outcome, std::vector<int> arm,
          std::vector<Column> columns)
      : schema_(std::move(schema)), outcome_(std::move(outcome)), arm_(std::move(arm)),
        columns_(std::move(columns)) {
    validate();
  }

  std::size_t size() const noexcept { return outcome_.size(); }
  const CovariateSchema& schema() const noexcept { return schema_; }
  const std::vector<double>& outcome() const noexcept { return outcome_; }
  const std::vector<int>& arm() const noexcept { return arm_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  const Column& column(std::string_view name) const {
    for (const auto& c : columns_)
      if (c.spec.name == name) return c;
    throw SchemaError("dataset has no covariate '" + std::string(name) + "'");
  }

  std::size_t n_treated() const noexcept {
    return static_cast<std::size_t>(std::count(arm_.begin(), arm_.end(), 1));
  }
  std::size_t n_control() const noexcept { return size() - n_treated(); }

 private:
  void validate() const {
    const auto n = outcome_.size();
    if (arm_.size() != n) throw SchemaError("arm column length differs from outcome length");
    if (columns_.size() != schema_.size()) throw SchemaError("column count differs from schema");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const auto& col = columns_[c];
      if (col.spec.name != schema_.covariates()[c].name)
        throw SchemaError("column order differs from schema at '" + col.spec.name + "'");
      const auto len = col.is_numeric() ? col.numeric.size() : col.codes.size();
      if (len != n) throw SchemaError("column '" + col.spec.name + "' has wrong length");
    }
    bool has0 = false, has1 = false;
    for (int a : arm_) {
      if (a != 0 && a != 1) throw SchemaError("arm values must be 0 or 1");
      (a == 1 ? has1 : has0) = true;
    }
    if (n > 0 && !(has0 && has1)) throw SchemaError("both arms must be present");
  }

  CovariateSchema schema_;
  std::vector<double> outcome_;
  std::vector<int> arm_;
  std::vector<Column> columns_;
};

namespace detail {

inline std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN"; }

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string quote_if_needed(const std::string& s, char delim) {
  if (s.find(delim) == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  return out + "\"";
}

}  // namespace detail

struct LoadOptions {
  char delimiter = ',';
  ArmLabels arm_labels;
};

/// Reads a delimiter-separated file with a header row. Rows are 1-based in
/// error messages, counting the header as row 1.
inline Dataset load_dataset(const std::string& path, const CovariateSchema& schema,
                            const std::string& outcome_col, const std::string& arm_col,
                            const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open input file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw LoadError("input file '" + path + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_record(line, options.delimiter);
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(std::string(detail::trim(header[i])), i);
  auto locate = [&](const std::string& name) {
    auto it = pos.find(name);
    if (it == pos.end()) throw SchemaError("missing column '" + name + "' in '" + path + "'");
    return it->second;
  };
  const auto y_pos = locate(outcome_col);
  const auto a_pos = locate(arm_col);
  std::vector<std::size_t> cov_pos;
  std::vector<Column> columns;
  std::vector<std::unordered_map<std::string, int>> level_index;
  for (const auto& spec : schema.covariates()) {
    cov_pos.push_back(locate(spec.name));
    columns.push_back(Column{spec, {}, {}});
    std::unordered_map<std::string, int> idx;
    for (std::size_t l = 0; l < spec.levels.size(); ++l) idx.emplace(spec.levels[l], static_cast<int>(l));
    level_index.push_back(std::move(idx));
  }

  std::vector<double> outcome;
  std::vector<int> arm;
  std::size_t row = 1;
  auto fail = [&](const std::string& col, const std::string& what) {
    throw LoadError("row " + std::to_string(row) + ", column '" + col + "': " + what);
  };
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_record(line, options.delimiter);
    if (cells.size() != header.size())
      fail(outcome_col, "expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(cells.size()));
    const auto y_text = detail::trim(cells[y_pos]);
    if (detail::is_missing(y_text)) fail(outcome_col, "missing value");
    const auto y = detail::parse_double(y_text);
    if (!y) fail(outcome_col, "cannot parse '" + std::string(y_text) + "' as a number");
    outcome.push_back(*y);

    const auto a_text = std::string(detail::trim(cells[a_pos]));
    if (detail::is_missing(a_text)) fail(arm_col, "missing value");
    if (a_text == options.arm_labels.treated) arm.push_back(1);
    else if (a_text == options.arm_labels.control) arm.push_back(0);
    else fail(arm_col, "arm value '" + a_text + "' is neither '" + options.arm_labels.control + "' nor '" +
                           options.arm_labels.treated + "'");

    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto& col = columns[c];
      const auto text = detail::trim(cells[cov_pos[c]]);
      if (detail::is_missing(text)) fail(col.spec.name, "missing value");
      if (col.is_numeric()) {
        const auto v = detail::parse_double(text);
        if (!v) fail(col.spec.name, "cannot parse '" + std::string(text) + "' as a number");
        col.numeric.push_back(*v);
      } else {
        auto it = level_index[c].find(std::string(text));
        if (it == level_index[c].end()) fail(col.spec.name, "undeclared level '" + std::string(text) + "'");
        col.codes.push_back(it->second);
      }
    }
  }
  if (outcome.empty()) throw LoadError("input file '" + path + "' has no data rows");
  try {
    return Dataset(schema, std::move(outcome), std::move(arm), std::move(columns));
  } catch (const SchemaError& e) {
    throw LoadError(e.what());
  }
}

/// Writes the dataset in the format `load_dataset` reads. Numbers use the
/// shortest representation that parses back to the same double.
inline void write_dataset(const std::string& path, const Dataset& data, const std::string& outcome_col,
                          const std::string& arm_col, const LoadOptions& options = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write '" + path + "'");
  const char d = options.delimiter;
  out << detail::quote_if_needed(outcome_col, d) << d << detail::quote_if_needed(arm_col, d);
  for (const auto& c : data.columns()) out << d << detail::quote_if_needed(c.spec.name, d);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << detail::format_double(data.outcome()[i]) << d
        << detail::quote_if_needed(data.arm()[i] ? options.arm_labels.treated : options.arm_labels.control, d);
    for (const auto& c : data.columns()) {
      out << d;
      if (c.is_numeric()) out << detail::format_double(c.numeric[i]);
      else out << detail::quote_if_needed(c.spec.levels[static_cast<std::size_t>(c.codes[i])], d);
    }
    out << '\n';
  }
}

}  // namespace hetscreen
