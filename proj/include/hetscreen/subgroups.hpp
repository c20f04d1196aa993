#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetscreen/binning.hpp"
#include "hetscreen/bitset.hpp"
#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"

namespace hetscreen {

struct SubgroupTerm {
  std::string covariate;
  std::string level;
  std::size_t covariate_index = 0;  // position in the binned covariate list
  std::size_t level_index = 0;

  std::string label() const { return covariate + "=" + level; }
  friend bool operator==(const SubgroupTerm&, const SubgroupTerm&) = default;
};

struct SubgroupDef {
  std::vector<SubgroupTerm> terms;

  std::string label() const {
    std::string out;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (t) out += " & ";
      out += terms[t].label();
    }
    return out;
  }

  /// Direct evaluation of the defining predicate on one row.
  bool contains(const std::vector<BinnedCovariate>& binned, std::size_t row) const {
    for (const auto& t : terms)
      if (binned[t.covariate_index].assignment[row] != static_cast<int>(t.level_index)) return false;
    return true;
  }
};

struct SubgroupIndex {
  SubgroupDef def;
  Bitset members;
  std::size_t n = 0;   // N_j
  std::size_t n1 = 0;  // treated members
  std::size_t n0 = 0;  // control members
  std::optional<std::size_t> duplicate_of;  // first subgroup with the identical member set

  std::string label() const { return def.label(); }
};

struct EnumerationOptions {
  std::size_t min_per_arm = 10;
  std::size_t max_depth = 2;
};

inline Bitset treated_mask(const Dataset& data) {
  Bitset mask(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.arm()[i] == 1) mask.set(i);
  return mask;
}

/// |members(a) ∩ members(b)|.
inline std::size_t overlap_count(const SubgroupIndex& a, const SubgroupIndex& b) {
  if (a.members.size() != b.members.size())
    throw UsageError("overlap_count on subgroups built over datasets of different size (" +
                     std::to_string(a.members.size()) + " vs " + std::to_string(b.members.size()) + ")");
  return intersect_count(a.members, b.members);
}

namespace detail {

inline void mark_duplicates(std::vector<SubgroupIndex>& groups) {
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    auto& bucket = by_hash[groups[j].members.hash()];
    for (std::size_t prior : bucket) {
      if (groups[prior].members == groups[j].members) {
        groups[j].duplicate_of = prior;
        break;
      }
    }
    if (!groups[j].duplicate_of) bucket.push_back(j);
  }
}

}  // namespace detail

/// All subgroups defined by 1..max_depth level constraints on distinct
/// covariates, keeping those with at least `min_per_arm` patients in each arm
/// and fewer than N members. Order: by depth, then covariates in list order,
/// then levels in level order.
inline std::vector<SubgroupIndex> enumerate_subgroups(const Dataset& data,
                                                      const std::vector<BinnedCovariate>& binned,
                                                      const EnumerationOptions& options = {}) {
  if (options.min_per_arm < 1) throw UsageError("min_per_arm must be at least 1");
  if (options.max_depth < 1) throw UsageError("max_depth must be at least 1");
  const std::size_t n = data.size();
  const Bitset treated = treated_mask(data);

  // Level membership for every binned covariate.
  std::vector<std::vector<Bitset>> level_sets(binned.size());
  for (std::size_t c = 0; c < binned.size(); ++c) {
    const auto& b = binned[c];
    if (b.degenerate) throw UsageError("degenerate binned covariate '" + b.source + "' passed to enumeration");
    if (b.size() != n) throw UsageError("binned covariate '" + b.source + "' does not match the dataset size");
    level_sets[c].assign(b.level_count(), Bitset(n));
    for (std::size_t i = 0; i < n; ++i) level_sets[c][static_cast<std::size_t>(b.assignment[i])].set(i);
  }

  std::vector<SubgroupIndex> out;
  auto emit = [&](const std::vector<SubgroupTerm>& terms, const Bitset& members) {
    const std::size_t nj = members.count();
    if (nj == n) return;
    const std::size_t n1 = intersect_count(members, treated);
    const std::size_t n0 = nj - n1;
    if (n1 < options.min_per_arm || n0 < options.min_per_arm) return;
    out.push_back(SubgroupIndex{SubgroupDef{terms}, members, nj, n1, n0, std::nullopt});
  };

  std::vector<SubgroupTerm> terms;
  // Depth-first over strictly increasing covariate positions.
  auto recurse = [&](auto&& self, std::size_t depth, std::size_t first_cov, const Bitset& acc) -> void {
    for (std::size_t c = first_cov; c < binned.size(); ++c) {
      for (std::size_t l = 0; l < binned[c].level_count(); ++l) {
        Bitset members = terms.empty() ? level_sets[c][l] : (acc & level_sets[c][l]);
        terms.push_back(SubgroupTerm{binned[c].source, binned[c].levels[l], c, l});
        if (terms.size() == depth) emit(terms, members);
        else if (members.count() >= 2 * options.min_per_arm) self(self, depth, c + 1, members);
        terms.pop_back();
      }
    }
  };
  for (std::size_t depth = 1; depth <= options.max_depth; ++depth) recurse(recurse, depth, 0, Bitset(n, true));

  detail::mark_duplicates(out);
  return out;
}

}  // namespace hetscreen
