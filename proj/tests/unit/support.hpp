#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "hetscreen/dataset.hpp"
#include "hetscreen/subgroups.hpp"

namespace testing_support {

using namespace hetscreen;

inline Column numeric_column(const std::string& name, std::vector<double> values) {
  return Column{{name, CovariateKind::numeric, {}, {}}, std::move(values), {}};
}

inline Column categorical_column(const std::string& name, std::vector<std::string> levels, std::vector<int> codes) {
  return Column{{name, CovariateKind::categorical, std::move(levels), {}}, {}, std::move(codes)};
}

inline Dataset make_dataset(std::vector<Column> columns, std::vector<double> y, std::vector<int> arm) {
  std::vector<CovariateSpec> specs;
  for (const auto& c : columns) specs.push_back(c.spec);
  return Dataset(CovariateSchema(std::move(specs)), std::move(y), std::move(arm), std::move(columns));
}

/// n rows, alternating arms, `numeric` standard-normal covariates and
/// `categorical` three-level covariates.
inline Dataset random_dataset(std::size_t n, std::size_t numeric, std::size_t categorical, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> level(0, 2);
  std::vector<Column> cols;
  for (std::size_t c = 0; c < numeric; ++c) {
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    cols.push_back(numeric_column("N" + std::to_string(c + 1), v));
  }
  for (std::size_t c = 0; c < categorical; ++c) {
    std::vector<int> v(n);
    for (auto& x : v) x = level(rng);
    cols.push_back(categorical_column("C" + std::to_string(c + 1), {"a", "b", "c"}, v));
  }
  std::vector<double> y(n);
  std::vector<int> arm(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = z(rng);
    arm[i] = static_cast<int>(i % 2);
  }
  return make_dataset(std::move(cols), std::move(y), std::move(arm));
}

/// Subgroup with the given member rows.
inline SubgroupIndex subgroup_of(const std::vector<std::size_t>& rows, std::size_t n, const std::vector<int>& arm) {
  SubgroupIndex g;
  g.members = Bitset(n);
  for (auto i : rows) {
    g.members.set(i);
    (arm[i] ? g.n1 : g.n0)++;
  }
  g.n = rows.size();
  g.def.terms.push_back({"G", std::to_string(rows.size()), 0, 0});
  return g;
}


/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hetscreen_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
