#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except for the Rational/BigInt aliases.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gibbs/rational.hpp"

namespace oracle {

using gibbs::BigInt;
using gibbs::Rational;

/// Rooted unlabelled trees with n nodes as canonical parenthesis strings,
/// generated by growing every tree of size n-1 by one leaf at every node.
inline std::string canon_tree(const std::string& s, std::size_t& pos) {
  // s[pos] == '('
  ++pos;
  std::vector<std::string> kids;
  while (s[pos] == '(') kids.push_back(canon_tree(s, pos));
  ++pos;  // ')'
  std::sort(kids.begin(), kids.end());
  std::string out = "(";
  for (auto& k : kids) out += k;
  return out + ")";
}

inline std::string canon_tree(const std::string& s) {
  std::size_t pos = 0;
  return canon_tree(s, pos);
}

inline std::vector<std::set<std::string>> rooted_trees(std::size_t max_n) {
  std::vector<std::set<std::string>> by_size(max_n + 1);
  if (max_n >= 1) by_size[1].insert("()");
  for (std::size_t n = 2; n <= max_n; ++n) {
    for (const auto& t : by_size[n - 1]) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != '(') continue;
        std::string grown = t.substr(0, i + 1) + "()" + t.substr(i + 1);
        by_size[n].insert(canon_tree(grown));
      }
    }
  }
  return by_size;
}

/// Rooted tree counts from the classical recurrence
/// (n) T_{n+1} = sum_{k=1}^{n} (sum_{d | k} d T_d) T_{n-k+1}.
inline std::vector<BigInt> polya_tree_counts(std::size_t max_n) {
  std::vector<BigInt> t(max_n + 1, 0);
  if (max_n >= 1) t[1] = 1;
  std::vector<BigInt> s(max_n + 1, 0);  // s_k = sum_{d|k} d t_d
  for (std::size_t n = 1; n < max_n; ++n) {
    s[n] = 0;
    for (std::size_t d = 1; d <= n; ++d) {
      if (n % d == 0) s[n] += t[d] * static_cast<unsigned long>(d);
    }
    BigInt acc = 0;
    for (std::size_t k = 1; k <= n; ++k) acc += s[k] * t[n - k + 1];
    t[n + 1] = acc / static_cast<unsigned long>(n);
  }
  return t;
}

/// Forests with n nodes as sorted lists of canonical tree strings.
inline std::vector<std::vector<std::string>> forests(std::size_t n) {
  const auto trees = rooted_trees(n);
  std::vector<std::string> pool;  // ordered by size, then string
  for (std::size_t k = 1; k <= n; ++k) pool.insert(pool.end(), trees[k].begin(), trees[k].end());
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> cur;
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t from, std::size_t left) {
    if (left == 0) {
      std::vector<std::string> f = cur;
      std::sort(f.begin(), f.end());
      out.push_back(f);
      return;
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      const std::size_t sz = pool[i].size() / 2;
      if (sz > left) break;
      cur.push_back(pool[i]);
      grow(i, left - sz);
      cur.pop_back();
    }
  };
  grow(0, n);
  return out;
}

/// Integer partitions of n, generated explicitly with non-increasing parts.
inline std::vector<std::vector<int>> partitions(int n, int max_part = -1) {
  if (max_part < 0) max_part = n;
  std::vector<std::vector<int>> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  for (int first = std::min(n, max_part); first >= 1; --first) {
    for (auto rest : partitions(n - first, first)) {
      rest.insert(rest.begin(), first);
      out.push_back(rest);
    }
  }
  return out;
}

/// Multisets of total size n drawn from items with given sizes and counts per
/// size: number of ways, by explicit enumeration of multiplicity vectors.
inline BigInt multiset_count(const std::vector<BigInt>& per_size, int n) {
  // Enumerate partitions of n; for part size s with multiplicity m there are
  // C(per_size[s] + m - 1, m) multisets.
  BigInt total = 0;
  for (const auto& p : partitions(n)) {
    std::map<int, unsigned long> mult;
    for (int s : p) ++mult[s];
    BigInt ways = 1;
    for (auto [s, m] : mult) {
      if (static_cast<std::size_t>(s) >= per_size.size()) {
        ways = 0;
        break;
      }
      BigInt top = per_size[s] + m - 1;
      BigInt c;
      if (top < 0 || per_size[s] == 0) {
        ways = 0;
        break;
      }
      mpz_bin_ui(c.get_mpz_t(), top.get_mpz_t(), m);
      ways *= c;
    }
    total += ways;
  }
  return total;
}

/// All permutations of {0..k-1}; cycle type as multiplicity map.
inline std::map<int, int> cycle_type(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  std::map<int, int> ct;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    ++ct[len];
  }
  return ct;
}

inline Rational factorial(unsigned long k) {
  BigInt f;
  mpz_fac_ui(f.get_mpz_t(), k);
  return Rational(f);
}

}  // namespace oracle
