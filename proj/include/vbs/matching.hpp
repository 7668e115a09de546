#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace vbs {

/// A set of disjoint unordered pairs over boundary legs 0..m-1.
///
/// Stands for the product of dot products prod (s_i . s_j) over its pairs;
/// the empty matching is the constant term. Pairs are kept with i < j and
/// sorted, so equal matchings compare equal.
struct PartialMatching {
  std::vector<std::pair<int, int>> pairs;

  PartialMatching() = default;
  explicit PartialMatching(std::vector<std::pair<int, int>> p);

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  bool covers(int leg) const;

  auto operator<=>(const PartialMatching&) const = default;
};

/// All partial matchings of m legs, ordered by pair count then lexicographically.
/// m = 3 gives {}, (1,2), (1,3), (2,3).
const std::vector<PartialMatching>& partial_matchings(int m);

/// Position of `mu` inside partial_matchings(m); throws if absent.
std::size_t matching_index(const PartialMatching& mu, int m);

/// "()" for the empty matching, otherwise 1-based "(1,2)(3,4)".
std::string to_key(const PartialMatching& mu);
PartialMatching parse_key(const std::string& key);

/// Relabels legs through `perm` (new leg = perm[old leg]).
PartialMatching relabel(const PartialMatching& mu, const std::vector<int>& perm);

}  // namespace vbs
