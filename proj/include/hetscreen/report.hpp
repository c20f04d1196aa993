#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetscreen/analyze.hpp"
#include "hetscreen/error.hpp"

namespace hetscreen {

inline constexpr const char* report_schema_version = "1.0";
inline constexpr const char* tool_name = "hetscreen";
inline constexpr const char* tool_version = "0.1.0";

/// Inputs echoed into the report metadata alongside the analysis settings.
struct RunInfo {
  std::string input;
  std::string schema;
  std::string outcome;
  std::string arm;
  std::optional<std::string> timestamp;  // null unless requested
};

namespace detail {

inline nlohmann::ordered_json json_number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json surprise_json(double p, const Surprise& s) {
  return {{"p", p}, {"S", s.value}, {"S_floored", s.floored}};
}

}  // namespace detail

inline nlohmann::ordered_json config_to_json(const AnalysisConfig& c) {
  nlohmann::ordered_json j;
  j["min_per_arm"] = c.enumeration.min_per_arm;
  j["max_depth"] = c.enumeration.max_depth;
  auto& m = j["methods"] = nlohmann::ordered_json::array();
  for (auto x : c.methods) m.push_back(to_string(x));
  j["simple_means"] = c.simple_means;
  j["s_levels"] = c.s_levels;
  j["n_perm"] = c.n_perm;
  j["folds"] = c.folds;
  j["learner"] = {{"kind", c.learner.kind == LearnerKind::ols ? "ols" : "lasso"},
                  {"n_lambda", c.learner.n_lambda},
                  {"lambda_min_ratio", c.learner.lambda_min_ratio},
                  {"inner_folds", c.learner.inner_folds}};
  j["propensity"] = c.propensity.describe();
  j["seed"] = c.seed;
  j["mvn"] = {{"target_se", c.mvn.target_se}, {"shifts", c.mvn.shifts}, {"max_points", c.mvn.max_points},
              {"max_dim", c.mvn.max_dim}};
  j["nearest_pd"] = {{"eigen_tol", c.nearest_pd.eigen_tol}, {"conv_tol", c.nearest_pd.conv_tol},
                     {"max_iterations", c.nearest_pd.max_iterations}};
  j["top_m"] = c.top_m;
  j["region_grid"] = c.region_grid;
  return j;
}

/// Self-contained report document; key names are documented in
/// docs/report_schema.md.
inline nlohmann::ordered_json report_to_json(const InferenceReport& rep, const AnalysisConfig& config,
                                             const RunInfo& run = {}) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = report_schema_version;

  auto& meta = doc["metadata"];
  meta["tool"] = tool_name;
  meta["version"] = tool_version;
  meta["input"] = {{"data", run.input}, {"schema", run.schema}, {"outcome", run.outcome}, {"arm", run.arm}};
  meta["config"] = config_to_json(config);
  meta["timestamp"] = run.timestamp ? nlohmann::ordered_json(*run.timestamp) : nlohmann::ordered_json(nullptr);

  auto& overall = doc["overall"];
  overall["delta_hat"] = rep.stats.delta_hat;
  overall["sigma_hat"] = rep.stats.sigma_hat;
  overall["N"] = rep.n;
  overall["n_trt"] = rep.n1;
  overall["n_ctrl"] = rep.n0;
  overall["k"] = rep.k();
  overall["T_max"] = rep.stats.T_max;
  overall["argmax"] = rep.subgroups[rep.stats.argmax].label();
  auto& om = overall["methods"] = nlohmann::ordered_json::object();
  for (const auto& m : rep.methods) {
    auto e = detail::surprise_json(m.p, m.S);
    if (m.std_error) e["std_error"] = *m.std_error;
    if (m.converged) e["converged"] = *m.converged;
    if (m.method == Method::mvn_integration && rep.correlation) {
      e["pd_repaired"] = rep.correlation->repaired;
      e["pd_repair_distance"] = rep.correlation->repair_distance;
    }
    om[to_string(m.method)] = std::move(e);
  }

  auto& points = doc["points"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < rep.k(); ++j) {
    const auto& g = rep.subgroups[j];
    nlohmann::ordered_json p;
    p["label"] = g.label();
    auto& terms = p["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : g.def.terms) terms.push_back({{"covariate", t.covariate}, {"level", t.level}});
    p["N_j"] = g.n;
    p["n1_j"] = g.n1;
    p["n0_j"] = g.n0;
    p["delta_hat_j"] = rep.stats.delta_hat_j[j];
    p["Delta_hat_j"] = rep.stats.Delta_hat_j[j];
    p["T_j"] = rep.stats.T_j[j];
    auto& pm = p["methods"] = nlohmann::ordered_json::object();
    for (const auto& m : rep.methods)
      if (!m.p_j.empty()) pm[to_string(m.method)] = detail::surprise_json(m.p_j[j], m.S_j[j]);
    p["duplicate_of"] = g.duplicate_of ? nlohmann::ordered_json(rep.subgroups[*g.duplicate_of].label())
                                       : nlohmann::ordered_json(nullptr);
    points.push_back(std::move(p));
  }

  auto& regions = doc["regions"] = nlohmann::ordered_json::array();
  for (const auto& m : rep.methods)
    for (const auto& r : m.regions) {
      nlohmann::ordered_json e;
      e["method"] = to_string(m.method);
      e["S"] = r.threshold.surprise ? nlohmann::ordered_json(*r.threshold.surprise) : nlohmann::ordered_json(nullptr);
      e["gamma"] = r.threshold.gamma;
      e["q_gamma"] = r.q_gamma;
      auto& curve = e["curve"] = nlohmann::ordered_json::array();
      for (const auto& pt : r.curve) curve.push_back({pt.n_j, pt.lower, pt.upper});
      regions.push_back(std::move(e));
    }

  auto& top = doc["top_table"];
  top["columns"] = {"Subgroup", "N (trt)", "N (ctrl)", "Trt. effect", "|T|"};
  auto& rows = top["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.top_table) rows.push_back({r.label, r.n_trt, r.n_ctrl, r.effect, r.abs_t});

  if (rep.baseline) {
    const auto& b = *rep.baseline;
    nlohmann::ordered_json e;
    e["method"] = "simple_means_bonferroni";
    e["tau"] = b.stats.tau;
    e["overall_difference"] = b.stats.overall_difference;
    e["k"] = b.stats.k();
    e["T_max"] = b.stats.T_max;
    e["p"] = b.p;
    e["S"] = b.S.value;
    e["S_floored"] = b.S.floored;
    auto& excluded = e["excluded"] = nlohmann::ordered_json::array();
    for (auto j : b.stats.excluded) excluded.push_back(rep.subgroups[j].label());
    doc["baseline"] = std::move(e);
  } else {
    doc["baseline"] = nullptr;
  }
  doc["warnings"] = rep.warnings;
  return doc;
}

/// Plain-text rendering of the top table.
inline std::string format_top_table(const std::vector<TopRow>& rows) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"Subgroup", "N (trt)", "N (ctrl)", "Trt. effect", "|T|"});
  for (const auto& r : rows) {
    char eff[32], t[32];
    std::snprintf(eff, sizeof eff, "%.3f", r.effect);
    std::snprintf(t, sizeof t, "%.2f", r.abs_t);
    cells.push_back({r.label, std::to_string(r.n_trt), std::to_string(r.n_ctrl), eff, t});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (c) os << "  ";
      if (c == 0) os << std::left << std::setw(static_cast<int>(width[c])) << cells[r][c];
      else os << std::right << std::setw(static_cast<int>(width[c])) << cells[r][c];
    }
    os << '\n';
  }
  return os.str();
}

/// Writes `content` to a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot move report into place at '" + path.string() + "'");
  }
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

/// Parses a report and checks that its major schema version is supported.
inline nlohmann::ordered_json parse_report(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string())
    throw ConfigError("report has no schema_version");
  const auto v = j["schema_version"].get<std::string>();
  const std::string major(report_schema_version, std::string_view(report_schema_version).find('.'));
  if (v.substr(0, v.find('.')) != major)
    throw ConfigError("unsupported report schema version " + v + " (supported: " + report_schema_version + ")");
  return j;
}

inline nlohmann::ordered_json read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open report '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

}  // namespace hetscreen
