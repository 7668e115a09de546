#include "vbs/matching.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "vbs/errors.hpp"

namespace vbs {

PartialMatching::PartialMatching(std::vector<std::pair<int, int>> p) : pairs(std::move(p)) {
  for (auto& [i, j] : pairs) {
    if (i == j) throw UsageError("matching pair joins a leg to itself");
    if (i > j) std::swap(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> legs;
  for (auto [i, j] : pairs) {
    legs.push_back(i);
    legs.push_back(j);
  }
  std::sort(legs.begin(), legs.end());
  if (std::adjacent_find(legs.begin(), legs.end()) != legs.end())
    throw UsageError("matching pairs are not disjoint");
}

bool PartialMatching::covers(int leg) const {
  return std::any_of(pairs.begin(), pairs.end(),
                     [leg](const auto& p) { return p.first == leg || p.second == leg; });
}

namespace {

void extend(int m, int from, std::vector<bool>& used, std::vector<std::pair<int, int>>& cur,
            std::vector<PartialMatching>& out) {
  out.emplace_back(cur);
  for (int i = from; i < m; ++i) {
    if (used[i]) continue;
    for (int j = i + 1; j < m; ++j) {
      if (used[j]) continue;
      used[i] = used[j] = true;
      cur.emplace_back(i, j);
      extend(m, i + 1, used, cur, out);
      cur.pop_back();
      used[i] = used[j] = false;
    }
  }
}

}  // namespace

const std::vector<PartialMatching>& partial_matchings(int m) {
  if (m < 0 || m > 12) throw UsageError("partial_matchings: leg count out of range");
  static std::mutex mutex;
  static std::map<int, std::vector<PartialMatching>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<PartialMatching> all;
  std::vector<bool> used(m, false);
  std::vector<std::pair<int, int>> cur;
  extend(m, 0, used, cur, all);
  std::stable_sort(all.begin(), all.end(), [](const PartialMatching& a, const PartialMatching& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.pairs < b.pairs;
  });
  return cache.emplace(m, std::move(all)).first->second;
}

std::size_t matching_index(const PartialMatching& mu, int m) {
  const auto& all = partial_matchings(m);
  auto it = std::find(all.begin(), all.end(), mu);
  if (it == all.end()) throw UsageError("matching " + to_key(mu) + " not in the basis");
  return static_cast<std::size_t>(it - all.begin());
}

std::string to_key(const PartialMatching& mu) {
  if (mu.empty()) return "()";
  std::ostringstream s;
  for (auto [i, j] : mu.pairs) s << '(' << i + 1 << ',' << j + 1 << ')';
  return s.str();
}

PartialMatching parse_key(const std::string& key) {
  if (key == "()") return {};
  std::vector<std::pair<int, int>> pairs;
  std::size_t pos = 0;
  while (pos < key.size()) {
    int i = 0, j = 0;
    char open = 0, comma = 0, close = 0;
    std::istringstream in(key.substr(pos));
    if (!(in >> open >> i >> comma >> j >> close) || open != '(' || comma != ',' || close != ')' ||
        i < 1 || j < 1)
      throw UsageError("malformed matching key '" + key + "'");
    pairs.emplace_back(i - 1, j - 1);
    pos = key.find(')', pos) + 1;
  }
  return PartialMatching(std::move(pairs));
}

PartialMatching relabel(const PartialMatching& mu, const std::vector<int>& perm) {
  std::vector<std::pair<int, int>> pairs;
  for (auto [i, j] : mu.pairs) pairs.emplace_back(perm.at(i), perm.at(j));
  return PartialMatching(std::move(pairs));
}

}  // namespace vbs
