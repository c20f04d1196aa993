#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetscreen/analyze.hpp"
#include "hetscreen/case_study.hpp"
#include "hetscreen/report.hpp"
#include "hetscreen/simulation.hpp"
#include "hetscreen/study.hpp"
#include "serve.hpp"

namespace fs = std::filesystem;
using namespace hetscreen;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Method parse_method(const std::string& s) {
  if (s == "permutation") return Method::permutation;
  if (s == "bonferroni") return Method::bonferroni;
  if (s == "mvn") return Method::mvn_integration;
  throw ConfigError("unknown method '" + s + "' (expected permutation, bonferroni or mvn)");
}

char parse_delimiter(const std::string& s) {
  if (s == "tab" || s == "\\t" || s == "\t") return '\t';
  if (s.size() != 1) throw ConfigError("delimiter must be a single character or 'tab'");
  return s[0];
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

struct AnalyzeArgs {
  std::string input, schema, outcome, arm, out, methods = "permutation", s_levels = "2,5,10";
  std::string learner = "lasso", propensity = "known", delimiter;
  std::size_t min_per_arm = 10, max_depth = 2, n_perm = 500, folds = 5, top = 5, workers = 1;
  std::uint64_t seed = 1;
  bool simple_means = false, export_phi = false, timestamp = false;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto schema_file = load_schema(a.schema);
  LoadOptions lo;
  lo.delimiter = a.delimiter.empty() ? schema_file.delimiter : parse_delimiter(a.delimiter);
  lo.arm_labels = schema_file.arm_labels;
  const std::string outcome = !a.outcome.empty() ? a.outcome : schema_file.outcome_col.value_or("");
  const std::string arm = !a.arm.empty() ? a.arm : schema_file.arm_col.value_or("");
  if (outcome.empty() || arm.empty()) throw ConfigError("outcome and arm columns are required (--outcome, --arm)");

  AnalysisConfig cfg;
  cfg.enumeration.min_per_arm = a.min_per_arm;
  cfg.enumeration.max_depth = a.max_depth;
  cfg.methods.clear();
  for (const auto& m : split_list(a.methods)) {
    if (m == "simple_means") cfg.simple_means = true;
    else cfg.methods.push_back(parse_method(m));
  }
  cfg.s_levels.clear();
  for (const auto& s : split_list(a.s_levels)) {
    const auto v = hetscreen::detail::parse_double(s);
    if (!v) throw ConfigError("surprise level '" + s + "' is not a number");
    cfg.s_levels.push_back(*v);
  }
  cfg.simple_means = cfg.simple_means || a.simple_means;
  cfg.n_perm = a.n_perm;
  cfg.folds = a.folds;
  cfg.top_m = a.top;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  if (a.learner == "ols") cfg.learner.kind = LearnerKind::ols;
  else if (a.learner != "lasso") throw ConfigError("unknown learner '" + a.learner + "'");
  if (a.propensity == "empirical") cfg.propensity = PropensityRule::empirical();
  else if (a.propensity.rfind("known", 0) == 0) {
    const auto eq = a.propensity.find('=');
    if (eq != std::string::npos) {
      const auto v = hetscreen::detail::parse_double(a.propensity.substr(eq + 1));
      if (!v) throw ConfigError("bad propensity '" + a.propensity + "'");
      cfg.propensity = PropensityRule::known(*v);
    }
  } else {
    throw ConfigError("propensity must be 'known', 'known=<p>' or 'empirical'");
  }
  cfg.validate();

  const auto data = load_dataset(a.input, schema_file.schema, outcome, arm, lo);
  const auto rep = analyze(data, cfg);

  RunInfo info{a.input, a.schema, outcome, arm, std::nullopt};
  if (a.timestamp) {
    const auto t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    info.timestamp = buf;
  }
  ensure_dir(a.out);
  write_atomic(fs::path(a.out) / "report.json", dump_json(report_to_json(rep, cfg, info)));
  write_atomic(fs::path(a.out) / "top_table.txt", format_top_table(rep.top_table));
  if (a.export_phi) {
    write_column((fs::path(a.out) / "pseudo_outcomes.txt").string(), rep.phi.phi);
    if (rep.permutation) write_column((fs::path(a.out) / "permutation_draws.txt").string(), rep.permutation->draws);
  }
  std::cout << "k = " << rep.k() << ", T_max = " << rep.stats.T_max << "\n";
  for (const auto& m : rep.methods) std::cout << to_string(m.method) << ": p = " << m.p << ", S = " << m.S.value << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << format_top_table(rep.top_table);
  return 0;
}

int run_simulate(const std::string& study, const std::string& out, std::optional<std::size_t> workers,
                 std::optional<std::size_t> reps) {
  auto cfg = sim::load_study(study);
  if (workers) cfg.workers = *workers;
  if (reps) cfg.reps = *reps;
  const auto res = sim::run_study(cfg);
  ensure_dir(out);
  write_atomic(fs::path(out) / "summary.json", dump_json(sim::study_to_json(res)));
  write_atomic(fs::path(out) / "replicates.csv", sim::replicates_csv(res));
  for (const auto& s : res.summaries)
    std::cout << "scenario " << s.scenario << " " << sim::to_string(s.setting) << " min " << s.min_per_arm << " "
              << sim::to_string(s.method) << ": n = " << s.n << ", failures = " << s.failures
              << ", KS = " << s.ks_distance << ", P(p<0.1) = " << s.prop_lt_01 << "\n";
  return 0;
}

serve::ReportServer* active_server = nullptr;

void stop_server(int) {
  if (active_server) active_server->stop();
}

int run_serve(const std::string& report, int port, const std::string& assets) {
  serve::ReportServer server(report, assets);
  const int bound = server.bind(port);
  active_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "serving " << report << " at http://127.0.0.1:" << bound << "/ (report at /report)" << std::endl;
  server.listen();
  active_server = nullptr;
  return 0;
}

int run_synth(const std::string& kind, const std::string& out, std::uint64_t seed, int scenario, double beta0,
              double beta1, std::size_t n) {
  ensure_dir(out);
  Dataset data;
  if (kind == "case-study") data = case_study::generate(seed);
  else if (kind == "scenario") data = sim::simulate_trial(sim::make_scenario(scenario, n), beta0, beta1, seed);
  else throw ConfigError("synth kind must be 'case-study' or 'scenario'");
  SchemaFile sf{data.schema(), "y", "arm", {}, ','};
  write_dataset((fs::path(out) / "data.csv").string(), data, "y", "arm");
  write_atomic(fs::path(out) / "schema.json", dump_json(schema_to_json(sf)));
  std::cout << "wrote " << data.size() << " rows (" << data.n_treated() << " treated, " << data.n_control()
            << " control) to " << out << "\n";
  return 0;
}

void print_error(const std::string& module, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j{{"error", {{"module", module}, {"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgroup treatment-effect homogeneity screening"};
  app.require_subcommand(1);

  AnalyzeArgs a;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the screening pipeline on a data file");
  analyze_cmd->add_option("--input", a.input, "Data file (delimited text with a header)")->required();
  analyze_cmd->add_option("--schema", a.schema, "Schema JSON file")->required();
  analyze_cmd->add_option("--outcome", a.outcome, "Outcome column (overrides the schema)");
  analyze_cmd->add_option("--arm", a.arm, "Arm column (overrides the schema)");
  analyze_cmd->add_option("--min-per-arm", a.min_per_arm, "Minimum patients per arm in a subgroup");
  analyze_cmd->add_option("--max-depth", a.max_depth, "Maximum number of terms per subgroup");
  analyze_cmd->add_option("--methods", a.methods, "Comma list of permutation, bonferroni, mvn, simple_means");
  analyze_cmd->add_option("--s-levels", a.s_levels, "Comma list of surprise levels for regions");
  analyze_cmd->add_option("--n-perm", a.n_perm, "Number of permutations");
  analyze_cmd->add_option("--folds", a.folds, "Cross-fitting folds");
  analyze_cmd->add_option("--seed", a.seed, "Master seed");
  analyze_cmd->add_option("--out", a.out, "Output directory")->required();
  analyze_cmd->add_option("--learner", a.learner, "lasso or ols");
  analyze_cmd->add_option("--propensity", a.propensity, "known, known=<p> or empirical");
  analyze_cmd->add_option("--delimiter", a.delimiter, "Field delimiter (a character or 'tab')");
  analyze_cmd->add_option("--top", a.top, "Rows in the top table");
  analyze_cmd->add_option("--workers", a.workers, "Worker threads (results do not depend on it)");
  analyze_cmd->add_flag("--simple-means", a.simple_means, "Add the simple-means Bonferroni baseline");
  analyze_cmd->add_flag("--export-phi", a.export_phi, "Also write pseudo-outcomes and permutation draws");
  analyze_cmd->add_flag("--timestamp", a.timestamp, "Record the wall-clock time in the report metadata");

  std::string study, sim_out;
  std::optional<std::size_t> sim_workers, sim_reps;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a simulation study");
  simulate_cmd->add_option("--study", study, "Study configuration JSON")->required();
  simulate_cmd->add_option("--out", sim_out, "Output directory")->required();
  simulate_cmd->add_option("--workers", sim_workers, "Worker threads (results do not depend on it)");
  simulate_cmd->add_option("--reps", sim_reps, "Override the replicate count");

  std::string report, assets;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a report read-only over HTTP on localhost");
  serve_cmd->add_option("--report", report, "Report JSON file")->required();
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
  serve_cmd->add_option("--assets", assets, "Directory with the UI bundle");

  std::string synth_kind = "case-study", synth_out;
  std::uint64_t synth_seed = 1;
  int synth_scenario = 1;
  double synth_beta0 = 0.0, synth_beta1 = 0.0;
  std::size_t synth_n = 500;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic data set and its schema");
  synth_cmd->add_option("--kind", synth_kind, "case-study or scenario");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Seed");
  synth_cmd->add_option("--scenario", synth_scenario, "Scenario id (kind=scenario)");
  synth_cmd->add_option("--beta0", synth_beta0, "Overall effect (kind=scenario)");
  synth_cmd->add_option("--beta1", synth_beta1, "Interaction effect (kind=scenario)");
  synth_cmd->add_option("--n", synth_n, "Trial size (kind=scenario)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze_cmd) return run_analyze(a);
    if (*simulate_cmd) return run_simulate(study, sim_out, sim_workers, sim_reps);
    if (*serve_cmd) return run_serve(report, port, assets);
    if (*synth_cmd) return run_synth(synth_kind, synth_out, synth_seed, synth_scenario, synth_beta0, synth_beta1, synth_n);
  } catch (const Error& e) {
    print_error(e.module(), e.kind(), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("internal", "exception", e.what());
    return 3;
  }
  return 0;
}
