// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//
//   acceptance [--only A3,A9] [--workers N] [--out DIR]

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "hetscreen/correlation.hpp"
#include "hetscreen/mvn.hpp"
#include "hetscreen/report.hpp"
#include "hetscreen/simulation.hpp"
#include "hetscreen/stats.hpp"
#include "hetscreen/study.hpp"

using namespace hetscreen;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

struct Context {
  std::size_t workers = 1;
  fs::path out;
};

// Shared study results, computed on first use.
class Studies {
 public:
  explicit Studies(const Context& ctx) : ctx_(ctx) {}

  // Scenario 1, homogeneous, min 10/arm, 500 replicates, N_perm = 500.
  const sim::StudyResult& null_study() {
    if (!null_) {
      sim::StudyConfig c;
      c.scenarios = {1};
      c.settings = {sim::Setting::homogeneous};
      c.min_per_arm = {10};
      c.methods = {sim::StudyMethod::permutation, sim::StudyMethod::bonferroni, sim::StudyMethod::simple_means};
      c.reps = 500;
      c.n_perm = 500;
      c.seed = 101;
      null_ = run(c, "null_study");
    }
    return *null_;
  }

  // Scenarios 1-4, beta1 = 2 beta1*, min 10/arm, 500 replicates.
  const sim::StudyResult& power_study() {
    if (!power_) {
      sim::StudyConfig c;
      c.scenarios = {1, 2, 3, 4};
      c.settings = {sim::Setting::heterogeneous};
      c.min_per_arm = {10};
      c.methods = {sim::StudyMethod::permutation, sim::StudyMethod::bonferroni, sim::StudyMethod::simple_means};
      c.reps = 500;
      c.n_perm = 500;
      c.seed = 202;
      power_ = run(c, "power_study");
    }
    return *power_;
  }

  // Scenario 1, homogeneous, min 60/arm, 100 replicates, mvn and a 5000-draw permutation reference.
  const sim::StudyResult& agreement_study() {
    if (!agreement_) {
      sim::StudyConfig c;
      c.scenarios = {1};
      c.settings = {sim::Setting::homogeneous};
      c.min_per_arm = {60};
      c.methods = {sim::StudyMethod::permutation, sim::StudyMethod::mvn};
      c.reps = 100;
      c.n_perm = 5000;
      c.seed = 303;
      agreement_ = run(c, "agreement_study");
    }
    return *agreement_;
  }

 private:
  std::optional<sim::StudyResult> run(sim::StudyConfig c, const std::string& name) {
    c.workers = ctx_.workers;
    auto r = sim::run_study(c);
    if (!ctx_.out.empty()) {
      fs::create_directories(ctx_.out);
      write_atomic(ctx_.out / (name + ".json"), dump_json(sim::study_to_json(r)));
      write_atomic(ctx_.out / (name + ".csv"), sim::replicates_csv(r));
    }
    return r;
  }

  const Context& ctx_;
  std::optional<sim::StudyResult> null_, power_, agreement_;
};

std::vector<const sim::ReplicateRow*> rows_of(const sim::StudyResult& r, int scenario, sim::StudyMethod m) {
  std::vector<const sim::ReplicateRow*> out;
  for (const auto& row : r.rows)
    if (row.scenario == scenario && row.method == m) out.push_back(&row);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->rep < b->rep; });
  return out;
}

std::size_t failures(const std::vector<const sim::ReplicateRow*>& rows) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](auto* r) { return !r->ok; }));
}

// ---------------------------------------------------------------------------

Verdict uniformity(Studies& s) {
  const auto* m = s.null_study().find(1, sim::Setting::homogeneous, 10, sim::StudyMethod::permutation);
  const bool ok = m->failures == 0 && m->ks_distance < 0.08;
  return {ok, "KS distance " + fmt(m->ks_distance) + " (limit < 0.08), n = " + std::to_string(m->n) +
                  ", failures = " + std::to_string(m->failures)};
}

Verdict bonferroni_conservatism(Studies& s) {
  std::string detail;
  bool ok = true;
  for (auto method : {sim::StudyMethod::bonferroni, sim::StudyMethod::simple_means}) {
    const auto* m = s.null_study().find(1, sim::Setting::homogeneous, 10, method);
    const double n = static_cast<double>(m->n);
    const double limit = 0.1 + 2.0 * std::sqrt(0.1 * 0.9 / n);
    const bool this_ok = m->failures == 0 && m->prop_le_01 <= limit && m->ecdf_05 < 0.5;
    ok = ok && this_ok;
    detail += (detail.empty() ? "" : "; ") + sim::to_string(method) + ": P(p<=0.1) = " + fmt(m->prop_le_01) +
              " (limit " + fmt(limit) + "), ECDF(0.5) = " + fmt(m->ecdf_05) + " (limit < 0.5)";
  }
  return {ok, detail};
}

Verdict method_agreement(Studies& s) {
  const auto& r = s.agreement_study();
  const auto perm = rows_of(r, 1, sim::StudyMethod::permutation);
  const auto mvn = rows_of(r, 1, sim::StudyMethod::mvn);
  std::size_t close = 0, se_ok = 0, both = 0;
  double max_se = 0.0, mean_k = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    mean_k += static_cast<double>(perm[i]->k) / static_cast<double>(perm.size());
    if (!perm[i]->ok || !mvn[i]->ok) continue;
    ++both;
    close += std::abs(perm[i]->p - mvn[i]->p) <= 0.05;
    se_ok += mvn[i]->std_error <= 0.005;
    max_se = std::max(max_se, mvn[i]->std_error);
  }
  const double frac = static_cast<double>(close) / static_cast<double>(perm.size());
  const bool ok = both == perm.size() && frac >= 0.95 && se_ok == both;
  return {ok, "|p_perm - p_mvn| <= 0.05 in " + fmt(frac, 3) + " of reps (limit >= 0.95), max MVN SE " + fmt(max_se, 5) +
                  " (limit <= 0.005), mean k " + fmt(mean_k, 1) + ", usable " + std::to_string(both) + "/" +
                  std::to_string(perm.size())};
}

Verdict power_ordering(Studies& s) {
  const auto& r = s.power_study();
  int holds = 0;
  std::string detail;
  for (int sc = 1; sc <= 4; ++sc) {
    const auto perm = rows_of(r, sc, sim::StudyMethod::permutation);
    const auto bonf = rows_of(r, sc, sim::StudyMethod::bonferroni);
    const auto simple = rows_of(r, sc, sim::StudyMethod::simple_means);
    const double n = static_cast<double>(perm.size());
    // Paired replicates: the SE of a difference of proportions uses the per-replicate differences.
    auto diff = [&](const std::vector<const sim::ReplicateRow*>& a, const std::vector<const sim::ReplicateRow*>& b) {
      double m = 0.0, ss = 0.0;
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = static_cast<double>(a[i]->ok && a[i]->p < 0.1) - static_cast<double>(b[i]->ok && b[i]->p < 0.1);
        m += d[i] / n;
      }
      for (double v : d) ss += (v - m) * (v - m);
      return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
    };
    auto power = [&](const std::vector<const sim::ReplicateRow*>& a) {
      return static_cast<double>(std::count_if(a.begin(), a.end(), [](auto* x) { return x->ok && x->p < 0.1; })) / n;
    };
    const auto [d1, se1] = diff(perm, bonf);
    const auto [d2, se2] = diff(bonf, simple);
    const bool ok = failures(perm) + failures(bonf) + failures(simple) == 0 && d1 > 2.0 * se1 && d2 > 2.0 * se2;
    holds += ok;
    detail += (sc > 1 ? "; " : "") + std::string("s") + std::to_string(sc) + " " + fmt(power(perm), 3) + "/" +
              fmt(power(bonf), 3) + "/" + fmt(power(simple), 3) + (ok ? " ok" : " no") + " (d " + fmt(d1, 3) + "+-" +
              fmt(se1, 3) + ", " + fmt(d2, 3) + "+-" + fmt(se2, 3) + ")";
  }
  return {holds >= 3, "perm/bonferroni/simple_means power; ordering with 2 SE margins in " + std::to_string(holds) +
                          " of 4 scenarios (limit >= 3): " + detail};
}

Verdict correlation_oracle() {
  const std::size_t n = 500, pairs = 50, draws = 100000, chunk = 5000;
  std::mt19937_64 rng(505);
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> order(n);
  for (std::size_t p = 0; p < pairs; ++p) {
    // Sizes and overlap drawn so that the pairs cover nested, disjoint and partial overlaps.
    std::uniform_int_distribution<std::size_t> size(20, 400);
    const std::size_t ni = size(rng), nj = size(rng);
    const std::size_t lo = ni + nj > n ? ni + nj - n : 0, hi = std::min(ni, nj);
    const std::size_t nij = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ni));
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(ni - nij),
                               order.begin() + static_cast<std::ptrdiff_t>(ni - nij + nj));
    members.push_back(std::move(a));
    members.push_back(std::move(b));
  }
  const auto k = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n));
  for (Eigen::Index g = 0; g < k; ++g)
    for (auto i : members[static_cast<std::size_t>(g)]) m(g, static_cast<Eigen::Index>(i)) = 1.0;
  const Eigen::VectorXd sizes = m.rowwise().sum();

  // Running moments of T over the draws.
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(k), s2 = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pairs));
  std::normal_distribution<double> z;
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(chunk));
  for (std::size_t done = 0; done < draws; done += chunk) {
    for (Eigen::Index c = 0; c < phi.cols(); ++c)
      for (Eigen::Index i = 0; i < phi.rows(); ++i) phi(i, c) = z(rng);
    const Eigen::RowVectorXd mean = phi.colwise().mean();
    const Eigen::RowVectorXd sd =
        ((phi.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt();
    const Eigen::MatrixXd sums = m * phi;
    for (Eigen::Index c = 0; c < phi.cols(); ++c) {
      Eigen::VectorXd t(k);
      for (Eigen::Index g = 0; g < k; ++g) {
        const double nj = sizes(g);
        t(g) = (sums(g, c) / nj - mean(c)) / (sd(c) * std::sqrt(1.0 / nj - 1.0 / static_cast<double>(n)));
      }
      s1 += t;
      s2 += t.cwiseAbs2();
      for (std::size_t p = 0; p < pairs; ++p) cross(static_cast<Eigen::Index>(p)) += t(2 * p) * t(2 * p + 1);
    }
  }
  const double d = static_cast<double>(draws);
  double worst = 0.0, rho_min = 1.0, rho_max = -1.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto a = static_cast<Eigen::Index>(2 * p), b = a + 1;
    const double cov = cross(static_cast<Eigen::Index>(p)) / d - s1(a) / d * s1(b) / d;
    const double va = s2(a) / d - std::pow(s1(a) / d, 2), vb = s2(b) / d - std::pow(s1(b) / d, 2);
    const double empirical = cov / std::sqrt(va * vb);
    const auto& ma = members[2 * p];
    const auto& mb = members[2 * p + 1];
    std::set<std::size_t> sa(ma.begin(), ma.end());
    const auto nij = static_cast<std::size_t>(std::count_if(mb.begin(), mb.end(), [&](auto i) { return sa.count(i) > 0; }));
    const double rho = subgroup_correlation(ma.size(), mb.size(), nij, n);
    worst = std::max(worst, std::abs(rho - empirical));
    rho_min = std::min(rho_min, rho);
    rho_max = std::max(rho_max, rho);
  }
  // Worked cases: identical, complementary and N_ij = N_i N_j / N.
  const double e1 = std::abs(subgroup_correlation(200, 200, 200, 500) - 1.0);
  const double e2 = std::abs(subgroup_correlation(200, 300, 0, 500) + 1.0);
  const double e3 = std::abs(subgroup_correlation(100, 250, 50, 500));
  const double exact = std::max({e1, e2, e3});
  return {worst <= 0.02 && exact <= 1e-12, "max |rho - empirical| = " + fmt(worst) + " over 50 pairs (limit <= 0.02; rho in [" +
                                               fmt(rho_min, 2) + ", " + fmt(rho_max, 2) + "]), exact-case error " +
                                               std::to_string(exact) + " (limit <= 1e-12)"};
}

Verdict variance_oracle() {
  const std::size_t n = 500, draws = 100000;
  const std::vector<std::size_t> sizes{25, 100, 400};
  std::mt19937_64 rng(606);
  std::normal_distribution<double> z;
  std::vector<double> sum(sizes.size(), 0.0), sum2(sizes.size(), 0.0), phi(n);
  for (std::size_t d = 0; d < draws; ++d) {
    for (auto& v : phi) v = z(rng);
    // The subgroup is the first N_j rows; i.i.d. rows make the choice immaterial.
    double total = 0.0, prefix = 0.0;
    std::size_t next = 0;
    std::vector<double> part(sizes.size());
    for (std::size_t i = 0; i < n; ++i) {
      prefix += phi[i];
      if (next < sizes.size() && i + 1 == sizes[next]) part[next++] = prefix;
    }
    total = prefix;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      const double diff = part[j] / static_cast<double>(sizes[j]) - total / static_cast<double>(n);
      sum[j] += diff;
      sum2[j] += diff * diff;
    }
  }
  double worst = 0.0;
  std::string detail;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const double mean = sum[j] / draws;
    const double empirical = (sum2[j] - draws * mean * mean) / (draws - 1.0);
    const double formula = difference_variance(1.0, sizes[j], n);
    const double rel = std::abs(empirical / formula - 1.0);
    worst = std::max(worst, rel);
    detail += (j ? ", " : "") + std::string("N_j=") + std::to_string(sizes[j]) + ": " + fmt(rel, 4);
  }
  return {worst <= 0.05, "relative error " + detail + " (limit <= 0.05)"};
}

Verdict region_coverage(Studies& s) {
  const auto& r = s.null_study();
  const auto rows = rows_of(r, 1, sim::StudyMethod::permutation);
  bool ok = failures(rows) == 0;
  std::string detail;
  for (std::size_t g = 0; g < r.config.gammas.size(); ++g) {
    const double gamma = r.config.gammas[g];
    const double inside = static_cast<double>(std::count_if(rows.begin(), rows.end(), [&](auto* x) {
                            return x->ok && x->t_max <= x->q_gamma[g];
                          })) /
                          static_cast<double>(rows.size());
    ok = ok && std::abs(inside - gamma) <= 0.04;
    detail += (g ? ", " : "") + std::string("gamma ") + fmt(gamma, 2) + ": " + fmt(inside, 3);
  }
  return {ok, "all-inside frequency " + detail + " (limit +-0.04), n = " + std::to_string(rows.size())};
}

Verdict calibration_check(Studies& s, const Context& ctx) {
  const auto& cal = s.power_study().calibration;
  const std::size_t reps = 4000;
  bool ok = true;
  std::string detail;
  for (const auto& [id, c] : cal) {
    const auto spec = sim::make_scenario(id, s.power_study().config.n);
    const std::uint64_t seed = derive_seed(909, streams::calibration, static_cast<std::uint64_t>(id));
    const auto hom = sim::overall_power(spec, c.homogeneous.beta0, c.homogeneous.beta1, reps, seed, 0.05, ctx.workers);
    const auto het = sim::overall_power(spec, c.heterogeneous.beta0, c.heterogeneous.beta1, reps, seed + 1, 0.05, ctx.workers);
    const auto inter = sim::interaction_power(spec, c.beta1_star, reps, seed + 2, 0.1, ctx.workers);
    ok = ok && std::abs(hom.power - 0.5) <= 0.03 && std::abs(het.power - 0.5) <= 0.03 && std::abs(inter.power - 0.8) <= 0.03;
    detail += (id > 1 ? "; " : "") + std::string("s") + std::to_string(id) + " overall " + fmt(hom.power, 3) + "/" +
              fmt(het.power, 3) + ", interaction " + fmt(inter.power, 3);
  }
  return {ok, "fresh-seed power over 4000 reps (limits 0.5 +-0.03, 0.8 +-0.03): " + detail};
}

Verdict mvn_oracle() {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(3, 3, 0.5);
  r.diagonal().setOnes();
  const MvnConfig config;
  const auto est = SymmetricBoxProbability(r, config)(2.0);
  const Eigen::Matrix3d l = r.llt().matrixL();
  std::mt19937_64 rng(707);
  std::normal_distribution<double> z;
  const std::size_t draws = 10000000;
  std::size_t inside = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    const Eigen::Vector3d x = l * Eigen::Vector3d(z(rng), z(rng), z(rng));
    inside += x.cwiseAbs().maxCoeff() <= 2.0;
  }
  const double mc = static_cast<double>(inside) / static_cast<double>(draws);
  const double se = std::hypot(std::sqrt(mc * (1.0 - mc) / static_cast<double>(draws)), est.std_error);
  const double t = 1.959963984540054;
  const double indep = SymmetricBoxProbability(Eigen::MatrixXd::Identity(2, 2), config)(t).probability;
  const double degen = SymmetricBoxProbability(Eigen::MatrixXd::Ones(2, 2), config)(t).probability;
  const bool ok = std::abs(est.probability - mc) <= 3.0 * se && std::abs(indep - 0.9025) <= 1e-3 &&
                  std::abs(degen - 0.95) <= 1e-3;
  return {ok, "k=3: " + fmt(est.probability, 5) + " vs oracle " + fmt(mc, 5) + " (limit 3 SE = " + fmt(3.0 * se, 5) +
                  "); independent " + fmt(indep, 5) + " (0.9025), degenerate " + fmt(degen, 5) + " (0.95), limit 1e-3"};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int shell(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(HETSCREEN_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / ("hetscreen_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto log = dir / "log";
  std::vector<std::string> problems;
  auto expect_ok = [&](const std::string& args) {
    if (shell(args, log) != 0) problems.push_back("command failed: " + args + ": " + slurp(log));
  };
  auto same = [&](const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || !fs::exists(b) || slurp(a) != slurp(b)) problems.push_back(a.filename().string() + " differs");
  };

  expect_ok("synth --kind scenario --scenario 4 --n 300 --beta0 0.2 --beta1 0.4 --seed 3 --out " + (dir / "d1").string());
  expect_ok("synth --kind scenario --scenario 4 --n 300 --beta0 0.2 --beta1 0.4 --seed 3 --out " + (dir / "d2").string());
  same(dir / "d1" / "data.csv", dir / "d2" / "data.csv");
  same(dir / "d1" / "schema.json", dir / "d2" / "schema.json");

  const std::string input = " --input " + (dir / "d1" / "data.csv").string() + " --schema " +
                            (dir / "d1" / "schema.json").string() +
                            " --min-per-arm 50 --methods permutation,bonferroni,mvn --simple-means --n-perm 300 --export-phi";
  expect_ok("analyze" + input + " --workers 1 --out " + (dir / "a1").string());
  expect_ok("analyze" + input + " --workers 1 --out " + (dir / "a2").string());
  expect_ok("analyze" + input + " --workers 4 --out " + (dir / "a4").string());
  for (const char* f : {"report.json", "top_table.txt", "pseudo_outcomes.txt", "permutation_draws.txt"}) {
    same(dir / "a1" / f, dir / "a2" / f);
    same(dir / "a1" / f, dir / "a4" / f);
  }

  {
    std::ofstream study(dir / "study.json");
    study << R"({"scenarios":[2],"settings":["homogeneous","heterogeneous"],"min_per_arm":[30],)"
          << R"("methods":["permutation","bonferroni","simple_means"],"reps":4,"n_perm":100,"calibration_reps":1000,"seed":9})";
  }
  expect_ok("simulate --study " + (dir / "study.json").string() + " --workers 1 --out " + (dir / "s1").string());
  expect_ok("simulate --study " + (dir / "study.json").string() + " --workers 3 --out " + (dir / "s3").string());
  same(dir / "s1" / "summary.json", dir / "s3" / "summary.json");
  same(dir / "s1" / "replicates.csv", dir / "s3" / "replicates.csv");

  std::error_code ec;
  fs::remove_all(dir, ec);
  std::string detail = "synth, analyze (workers 1/1/4) and simulate (workers 1/3) outputs";
  if (problems.empty()) return {true, detail + " byte-identical"};
  for (const auto& p : problems) detail += "; " + p;
  return {false, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetscreen acceptance suite"};
  std::string only;
  Context ctx;
  ctx.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
  app.add_option("--only", only, "Comma list of criterion ids to run");
  app.add_option("--workers", ctx.workers, "Worker threads");
  app.add_option("--out", out, "Directory for the study outputs");
  CLI11_PARSE(app, argc, argv);
  ctx.out = out;

  std::set<std::string> selected;
  for (std::size_t pos = 0; pos < only.size();) {
    const auto end = std::min(only.find(',', pos), only.size());
    selected.insert(only.substr(pos, end - pos));
    pos = end + 1;
  }

  Studies studies(ctx);
  struct Criterion {
    std::string id, name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"A1", "uniformity under homogeneity", [&] { return uniformity(studies); }},
      {"A2", "bonferroni conservatism", [&] { return bonferroni_conservatism(studies); }},
      {"A3", "permutation and mvn agreement", [&] { return method_agreement(studies); }},
      {"A4", "power ordering under heterogeneity", [&] { return power_ordering(studies); }},
      {"A5", "correlation formula oracle", [] { return correlation_oracle(); }},
      {"A6", "variance formula oracle", [] { return variance_oracle(); }},
      {"A7", "homogeneity region coverage", [&] { return region_coverage(studies); }},
      {"A8", "calibration on fresh seeds", [&] { return calibration_check(studies, ctx); }},
      {"A9", "mvn integrator oracle", [] { return mvn_oracle(); }},
      {"A10", "determinism across reruns and workers", [] { return determinism(); }},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ran;
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << v.detail << " [" << fmt(secs, 1)
              << " s]" << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
