#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetscreen/analyze.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/parallel.hpp"
#include "hetscreen/reference.hpp"
#include "hetscreen/rng.hpp"
#include "hetscreen/simulation.hpp"

namespace hetscreen::sim {

enum class Setting { homogeneous, heterogeneous };

inline std::string to_string(Setting s) { return s == Setting::homogeneous ? "homogeneous" : "heterogeneous"; }

/// Global-test flavours compared in the study.
enum class StudyMethod { permutation, bonferroni, mvn, simple_means };

inline std::string to_string(StudyMethod m) {
  switch (m) {
    case StudyMethod::permutation: return "permutation";
    case StudyMethod::bonferroni: return "bonferroni";
    case StudyMethod::mvn: return "mvn";
    default: return "simple_means";
  }
}

inline StudyMethod parse_study_method(const std::string& s) {
  if (s == "permutation") return StudyMethod::permutation;
  if (s == "bonferroni") return StudyMethod::bonferroni;
  if (s == "mvn") return StudyMethod::mvn;
  if (s == "simple_means") return StudyMethod::simple_means;
  throw ConfigError("unknown study method '" + s + "'");
}

struct StudyConfig {
  std::vector<int> scenarios{1};
  std::vector<Setting> settings{Setting::homogeneous};
  std::vector<std::size_t> min_per_arm{10};
  std::vector<StudyMethod> methods{StudyMethod::permutation};
  std::size_t reps = 10;
  std::size_t n = 500;
  std::size_t n_perm = 500;
  std::size_t folds = 5;
  LearnerSpec learner;
  MvnConfig mvn;
  std::vector<double> gammas{0.75, 0.97};
  std::size_t calibration_reps = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool record_timing = false;

  void validate() const {
    if (scenarios.empty() || settings.empty() || min_per_arm.empty() || methods.empty())
      throw ConfigError("study needs at least one scenario, setting, filter and method");
    for (int s : scenarios)
      if (s < 1 || s > 4) throw ConfigError("scenario id must be 1..4, got " + std::to_string(s));
    if (reps < 1) throw ConfigError("reps must be at least 1");
    if (calibration_reps < 1000) throw ConfigError("calibration_reps must be at least 1000");
    for (double g : gammas)
      if (!(g > 0.0 && g < 1.0)) throw ConfigError("gammas must lie in (0, 1)");
    learner.validate();
  }
};

inline StudyConfig study_from_json(const nlohmann::json& j) {
  StudyConfig c;
  try {
    if (j.contains("scenarios")) c.scenarios = j.at("scenarios").get<std::vector<int>>();
    if (j.contains("settings")) {
      c.settings.clear();
      for (const auto& s : j.at("settings")) {
        const auto v = s.get<std::string>();
        if (v == "homogeneous") c.settings.push_back(Setting::homogeneous);
        else if (v == "heterogeneous") c.settings.push_back(Setting::heterogeneous);
        else throw ConfigError("unknown setting '" + v + "'");
      }
    }
    if (j.contains("min_per_arm")) c.min_per_arm = j.at("min_per_arm").get<std::vector<std::size_t>>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_study_method(m.get<std::string>()));
    }
    if (j.contains("reps")) c.reps = j.at("reps").get<std::size_t>();
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("n_perm")) c.n_perm = j.at("n_perm").get<std::size_t>();
    if (j.contains("folds")) c.folds = j.at("folds").get<std::size_t>();
    if (j.contains("learner")) {
      const auto l = j.at("learner").get<std::string>();
      if (l == "ols") c.learner.kind = LearnerKind::ols;
      else if (l == "lasso") c.learner.kind = LearnerKind::lasso;
      else throw ConfigError("unknown learner '" + l + "'");
    }
    if (j.contains("gammas")) c.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("calibration_reps")) c.calibration_reps = j.at("calibration_reps").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("mvn_target_se")) c.mvn.target_se = j.at("mvn_target_se").get<double>();
    if (j.contains("mvn_max_dim")) c.mvn.max_dim = j.at("mvn_max_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("study config: ") + e.what());
  }
  c.validate();
  return c;
}

inline StudyConfig load_study(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("study config '" + path + "' is not valid JSON: " + e.what());
  }
  return study_from_json(j);
}

// ---------------------------------------------------------------------------
// Results

struct ReplicateRow {
  int scenario = 1;
  Setting setting = Setting::homogeneous;
  std::size_t min_per_arm = 10;
  std::size_t rep = 0;
  StudyMethod method = StudyMethod::permutation;
  bool ok = false;
  std::string error;
  std::size_t k = 0;
  double t_max = 0.0;
  double p = 1.0;
  double S = 0.0;
  double std_error = std::numeric_limits<double>::quiet_NaN();  // mvn integration error
  std::vector<double> q_gamma;  // per configured gamma; NaN where unavailable
  double seconds = 0.0;         // analysis wall-clock, only with record_timing
};

struct MethodSummary {
  int scenario = 1;
  Setting setting = Setting::homogeneous;
  std::size_t min_per_arm = 10;
  StudyMethod method = StudyMethod::permutation;
  std::size_t n = 0;
  std::size_t failures = 0;
  std::vector<double> p;  // successful replicates, in replicate order
  double ks_distance = 0.0;
  std::vector<std::pair<double, double>> ecdf;  // (x, F_n(x)) on a 0.01 grid
  double prop_lt_01 = 0.0, prop_lt_01_se = 0.0;
  double prop_le_01 = 0.0, prop_le_01_se = 0.0;
  double ecdf_05 = 0.0;
  double median_p = 0.0;
  std::vector<double> coverage;  // P(T_max <= q_gamma) per gamma; NaN where unavailable
  double mean_k = 0.0;
  std::optional<double> seconds_per_rep;
};

struct StudyResult {
  StudyConfig config;
  std::map<int, CalibrationResult> calibration;
  std::vector<ReplicateRow> rows;
  std::vector<MethodSummary> summaries;

  const MethodSummary* find(int scenario, Setting setting, std::size_t min_per_arm, StudyMethod m) const {
    for (const auto& s : summaries)
      if (s.scenario == scenario && s.setting == setting && s.min_per_arm == min_per_arm && s.method == m) return &s;
    return nullptr;
  }
};

/// sup_x |F_n(x) - x| for a sample on [0, 1].
inline double ks_uniform(std::vector<double> p) {
  if (p.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - p[i]);
    d = std::max(d, p[i] - static_cast<double>(i) / n);
  }
  return d;
}

inline double ecdf_at(const std::vector<double>& p, double x) {
  if (p.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(std::count_if(p.begin(), p.end(), [x](double v) { return v <= x; })) /
         static_cast<double>(p.size());
}

inline MethodSummary summarize(const std::vector<const ReplicateRow*>& rows, const std::vector<double>& gammas,
                               bool timing) {
  MethodSummary s;
  const auto& first = *rows.front();
  s.scenario = first.scenario;
  s.setting = first.setting;
  s.min_per_arm = first.min_per_arm;
  s.method = first.method;
  std::vector<std::size_t> inside(gammas.size(), 0), usable(gammas.size(), 0);
  double k_sum = 0.0, t_sum = 0.0;
  for (const auto* r : rows) {
    if (!r->ok) {
      ++s.failures;
      continue;
    }
    s.p.push_back(r->p);
    k_sum += static_cast<double>(r->k);
    t_sum += r->seconds;
    for (std::size_t g = 0; g < gammas.size(); ++g)
      if (std::isfinite(r->q_gamma[g])) {
        ++usable[g];
        inside[g] += r->t_max <= r->q_gamma[g];
      }
  }
  s.n = s.p.size();
  const double n = static_cast<double>(s.n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto se = [n](double q) { return std::sqrt(q * (1.0 - q) / n); };
  s.ks_distance = ks_uniform(s.p);
  for (int i = 1; i <= 100; ++i) s.ecdf.emplace_back(i / 100.0, ecdf_at(s.p, i / 100.0));
  if (s.n > 0) {
    s.prop_lt_01 = static_cast<double>(std::count_if(s.p.begin(), s.p.end(), [](double v) { return v < 0.1; })) / n;
    s.prop_le_01 = ecdf_at(s.p, 0.1);
    s.prop_lt_01_se = se(s.prop_lt_01);
    s.prop_le_01_se = se(s.prop_le_01);
    s.ecdf_05 = ecdf_at(s.p, 0.5);
    auto sorted = s.p;
    std::sort(sorted.begin(), sorted.end());
    s.median_p = s.n % 2 ? sorted[s.n / 2] : 0.5 * (sorted[s.n / 2 - 1] + sorted[s.n / 2]);
    s.mean_k = k_sum / n;
    if (timing) s.seconds_per_rep = t_sum / n;
  } else {
    s.prop_lt_01 = s.prop_le_01 = s.prop_lt_01_se = s.prop_le_01_se = s.ecdf_05 = s.median_p = s.mean_k = nan;
  }
  for (std::size_t g = 0; g < gammas.size(); ++g)
    s.coverage.push_back(usable[g] ? static_cast<double>(inside[g]) / static_cast<double>(usable[g]) : nan);
  return s;
}

namespace detail {

inline AnalysisConfig study_analysis_config(const StudyConfig& c, std::size_t min_per_arm, std::uint64_t seed) {
  AnalysisConfig a;
  a.enumeration.min_per_arm = min_per_arm;
  a.methods.clear();
  for (auto m : c.methods) {
    if (m == StudyMethod::permutation) a.methods.push_back(Method::permutation);
    if (m == StudyMethod::bonferroni) a.methods.push_back(Method::bonferroni);
    if (m == StudyMethod::mvn) a.methods.push_back(Method::mvn_integration);
    if (m == StudyMethod::simple_means) a.simple_means = true;
  }
  a.n_perm = c.n_perm;
  a.folds = c.folds;
  a.learner = c.learner;
  a.mvn = c.mvn;
  a.seed = seed;
  a.individual_pvalues = false;
  a.regions = false;
  a.mvn_limit_is_error = false;
  a.top_m = 0;
  a.workers = 1;
  return a;
}

inline std::uint64_t cell_seed(std::uint64_t seed, int scenario, Setting setting) {
  return derive_seed(seed, streams::repetition, static_cast<std::uint64_t>(scenario) * 2 + (setting == Setting::heterogeneous));
}

}  // namespace detail

/// Runs every scenario x setting x filter cell for `reps` replicates. Both
/// filters of a (scenario, setting) cell analyse the same simulated trials.
inline StudyResult run_study(const StudyConfig& config) {
  config.validate();
  StudyResult out;
  out.config = config;
  for (int s : config.scenarios) {
    CalibrationOptions co;
    co.reps = config.calibration_reps;
    co.seed = derive_seed(config.seed, streams::calibration, static_cast<std::uint64_t>(s));
    co.workers = config.workers;
    out.calibration[s] = calibrate(make_scenario(s, config.n), co);
  }

  struct Cell {
    int scenario;
    Setting setting;
    std::size_t min_per_arm;
  };
  std::vector<Cell> cells;
  for (int s : config.scenarios)
    for (Setting st : config.settings)
      for (std::size_t m : config.min_per_arm) cells.push_back({s, st, m});

  const std::size_t n_methods = config.methods.size();
  const std::size_t jobs = cells.size() * config.reps;
  out.rows.resize(jobs * n_methods);
  parallel_for(jobs, config.workers, [&](std::size_t job) {
    const auto& cell = cells[job / config.reps];
    const std::size_t rep = job % config.reps;
    const auto& cal = out.calibration.at(cell.scenario);
    const auto& setting = cal.setting(cell.setting == Setting::heterogeneous);
    const auto spec = make_scenario(cell.scenario, config.n);
    const std::uint64_t seed = derive_seed(detail::cell_seed(config.seed, cell.scenario, cell.setting), streams::repetition, rep);

    ReplicateRow base;
    base.scenario = cell.scenario;
    base.setting = cell.setting;
    base.min_per_arm = cell.min_per_arm;
    base.rep = rep;
    base.q_gamma.assign(config.gammas.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t m = 0; m < n_methods; ++m) {
      auto& row = out.rows[job * n_methods + m];
      row = base;
      row.method = config.methods[m];
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto data = simulate_trial(spec, setting.beta0, setting.beta1, seed);
      const auto rep_result = analyze(data, detail::study_analysis_config(config, cell.min_per_arm, seed));
      const double seconds = config.record_timing
                                 ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                                 : 0.0;
      for (std::size_t m = 0; m < n_methods; ++m) {
        auto& row = out.rows[job * n_methods + m];
        row.seconds = seconds;
        row.k = rep_result.k();
        row.t_max = rep_result.stats.T_max;
        const MethodResult* mr = nullptr;
        switch (row.method) {
          case StudyMethod::permutation: mr = rep_result.find(Method::permutation); break;
          case StudyMethod::bonferroni: mr = rep_result.find(Method::bonferroni); break;
          case StudyMethod::mvn: mr = rep_result.find(Method::mvn_integration); break;
          case StudyMethod::simple_means: break;
        }
        if (row.method == StudyMethod::simple_means) {
          const auto& b = *rep_result.baseline;
          row.k = b.stats.included.size();
          row.t_max = b.stats.T_max;
          row.p = b.p;
          row.S = b.S.value;
          for (std::size_t g = 0; g < config.gammas.size(); ++g)
            row.q_gamma[g] = quantile_bonferroni(config.gammas[g], row.k);
          row.ok = true;
          continue;
        }
        if (!mr) {
          row.error = "method skipped (k = " + std::to_string(rep_result.k()) + " exceeds the MVN limit)";
          continue;
        }
        row.p = mr->p;
        row.S = mr->S.value;
        if (mr->std_error) row.std_error = *mr->std_error;
        for (std::size_t g = 0; g < config.gammas.size(); ++g) {
          if (row.method == StudyMethod::permutation) row.q_gamma[g] = rep_result.permutation->quantile(config.gammas[g]);
          if (row.method == StudyMethod::bonferroni) row.q_gamma[g] = quantile_bonferroni(config.gammas[g], row.k);
        }
        row.ok = true;
      }
    } catch (const Error& e) {
      for (std::size_t m = 0; m < n_methods; ++m) out.rows[job * n_methods + m].error = e.what();
    }
  });

  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t m = 0; m < n_methods; ++m) {
      std::vector<const ReplicateRow*> rows;
      for (std::size_t r = 0; r < config.reps; ++r) rows.push_back(&out.rows[(c * config.reps + r) * n_methods + m]);
      out.summaries.push_back(summarize(rows, config.gammas, config.record_timing));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json study_config_to_json(const StudyConfig& c) {
  nlohmann::ordered_json j;
  j["scenarios"] = c.scenarios;
  auto& settings = j["settings"] = nlohmann::ordered_json::array();
  for (auto s : c.settings) settings.push_back(to_string(s));
  j["min_per_arm"] = c.min_per_arm;
  auto& methods = j["methods"] = nlohmann::ordered_json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  j["reps"] = c.reps;
  j["n"] = c.n;
  j["n_perm"] = c.n_perm;
  j["folds"] = c.folds;
  j["learner"] = c.learner.kind == LearnerKind::ols ? "ols" : "lasso";
  j["gammas"] = c.gammas;
  j["calibration_reps"] = c.calibration_reps;
  j["seed"] = c.seed;
  j["record_timing"] = c.record_timing;
  j["mvn_target_se"] = c.mvn.target_se;
  j["mvn_max_dim"] = c.mvn.max_dim;
  return j;
}

inline nlohmann::ordered_json study_to_json(const StudyResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = "1.0";
  j["metadata"] = {{"tool", "hetscreen"}, {"kind", "simulation-study"}, {"config", study_config_to_json(r.config)},
                   {"timestamp", nullptr}};
  auto& cal = j["calibration"] = nlohmann::ordered_json::array();
  for (const auto& [id, c] : r.calibration) {
    cal.push_back({{"scenario", id},
                   {"reps", c.reps},
                   {"beta1_star", c.beta1_star},
                   {"interaction_power", c.interaction_power},
                   {"interaction_se", c.interaction_se},
                   {"homogeneous", {{"beta0", c.homogeneous.beta0}, {"beta1", c.homogeneous.beta1},
                                    {"overall_power", c.homogeneous.overall_power}, {"overall_se", c.homogeneous.overall_se}}},
                   {"heterogeneous", {{"beta0", c.heterogeneous.beta0}, {"beta1", c.heterogeneous.beta1},
                                      {"overall_power", c.heterogeneous.overall_power},
                                      {"overall_se", c.heterogeneous.overall_se}}}});
  }
  auto& sums = j["summaries"] = nlohmann::ordered_json::array();
  for (const auto& s : r.summaries) {
    nlohmann::ordered_json e;
    e["scenario"] = s.scenario;
    e["setting"] = to_string(s.setting);
    e["min_per_arm"] = s.min_per_arm;
    e["method"] = to_string(s.method);
    e["n"] = s.n;
    e["failures"] = s.failures;
    e["ks_distance"] = detail::number_or_null(s.ks_distance);
    e["prop_p_lt_0.1"] = detail::number_or_null(s.prop_lt_01);
    e["prop_p_lt_0.1_se"] = detail::number_or_null(s.prop_lt_01_se);
    e["prop_p_le_0.1"] = detail::number_or_null(s.prop_le_01);
    e["prop_p_le_0.1_se"] = detail::number_or_null(s.prop_le_01_se);
    e["ecdf_0.5"] = detail::number_or_null(s.ecdf_05);
    e["median_p"] = detail::number_or_null(s.median_p);
    e["mean_k"] = detail::number_or_null(s.mean_k);
    auto& cov = e["coverage"] = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < s.coverage.size(); ++g)
      cov.push_back({{"gamma", r.config.gammas[g]}, {"all_inside", detail::number_or_null(s.coverage[g])}});
    auto& ecdf = e["ecdf"] = nlohmann::ordered_json::array();
    for (const auto& [x, f] : s.ecdf) ecdf.push_back({x, detail::number_or_null(f)});
    e["p_values"] = s.p;
    if (s.seconds_per_rep) e["seconds_per_rep"] = *s.seconds_per_rep;
    sums.push_back(std::move(e));
  }
  return j;
}

inline std::string replicates_csv(const StudyResult& r) {
  std::ostringstream os;
  os << "scenario,setting,min_per_arm,rep,method,ok,k,t_max,p,S,std_error";
  for (double g : r.config.gammas) os << ",q_" << hetscreen::detail::format_double(g);
  if (r.config.record_timing) os << ",seconds";
  os << ",error\n";
  for (const auto& row : r.rows) {
    os << row.scenario << ',' << to_string(row.setting) << ',' << row.min_per_arm << ',' << row.rep << ','
       << to_string(row.method) << ',' << (row.ok ? 1 : 0) << ',' << row.k << ',';
    if (row.ok) os << hetscreen::detail::format_double(row.t_max) << ',' << hetscreen::detail::format_double(row.p) << ','
                   << hetscreen::detail::format_double(row.S) << ','
                   << (std::isfinite(row.std_error) ? hetscreen::detail::format_double(row.std_error) : "");
    else os << ",,,";
    for (double q : row.q_gamma) os << ',' << (std::isfinite(q) ? hetscreen::detail::format_double(q) : "");
    if (r.config.record_timing) os << ',' << hetscreen::detail::format_double(row.seconds);
    os << ',' << hetscreen::detail::quote_if_needed(row.error, ',') << '\n';
  }
  return os.str();
}

}  // namespace hetscreen::sim
