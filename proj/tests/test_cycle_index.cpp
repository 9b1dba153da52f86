#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gibbs/cycle_index.hpp"
#include "gibbs/error.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

CycleType ct(std::map<unsigned, unsigned> m) { return CycleType(std::move(m)); }

TruncatedSeries monomial_z(std::size_t n) { return TruncatedSeries::monomial(1, Rational(1), n); }

// z / (1 - z): one object of every positive size.
TruncatedSeries positive_integers(std::size_t n) {
  std::vector<Rational> q(n + 1, Rational(1));
  q[0] = 0;
  return TruncatedSeries(std::move(q));
}

TruncatedSeries polya_series(std::size_t n) {
  auto t = oracle::polya_tree_counts(n);
  std::vector<Rational> q;
  for (auto& x : t) q.emplace_back(x);
  return TruncatedSeries(std::move(q));
}

// (1/k!) * #{sigma in S_k of each cycle type}: the cycle index of SET on k atoms.
std::map<CycleType, Rational> brute_set_slice(int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::map<CycleType, Rational> out;
  do {
    std::map<unsigned, unsigned> m;
    for (auto [len, cnt] : oracle::cycle_type(perm)) m[static_cast<unsigned>(len)] = cnt;
    out[CycleType(m)] += 1;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& [t, c] : out) c /= oracle::factorial(static_cast<unsigned long>(k));
  return out;
}

// Symmetries (order, sigma) of SEQ on k atoms with sigma(order) = order.
std::map<CycleType, Rational> brute_seq_slice(int k) {
  std::vector<int> order(static_cast<std::size_t>(k)), perm(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::map<CycleType, Rational> out;
  do {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> image(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) image[i] = perm[static_cast<std::size_t>(order[i])];
      if (image != order) continue;
      std::map<unsigned, unsigned> m;
      for (auto [len, cnt] : oracle::cycle_type(perm)) m[static_cast<unsigned>(len)] = cnt;
      out[CycleType(m)] += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& [t, c] : out) c /= oracle::factorial(static_cast<unsigned long>(k));
  return out;
}

}  // namespace

TEST_CASE("z_set coefficients") {
  auto z = z_set(6);
  CHECK(z.coeff(CycleType()) == 1);
  CHECK(z.coeff(ct({{1, 2}})) == Rational(1, 2));
  CHECK(z.coeff(ct({{2, 1}})) == Rational(1, 2));
  CHECK(z.coeff(ct({{1, 1}, {2, 1}})) == Rational(1, 2));
  CHECK(z.coeff(ct({{1, 7}})) == 0);  // beyond truncation
}

TEST_CASE("SET and SEQ cycle indices equal brute-force symmetry counts for k <= 5") {
  auto zs = z_set(5);
  auto zq = z_seq(5);
  for (int k = 0; k <= 5; ++k) {
    auto set_slice = brute_set_slice(k);
    auto seq_slice = brute_seq_slice(k);
    for (const auto& [t, c] : zs.terms()) {
      if (static_cast<int>(t.degree()) != k) continue;
      CHECK(c == set_slice[t]);
    }
    for (const auto& [t, c] : set_slice) CHECK(zs.coeff(t) == c);
    for (const auto& [t, c] : seq_slice) CHECK(zq.coeff(t) == c);
    std::size_t seq_terms = 0;
    for (const auto& [t, c] : zq.terms()) seq_terms += static_cast<int>(t.degree()) == k;
    CHECK(seq_terms == seq_slice.size());
  }
  CHECK(CycleIndexPoly::atom(5).terms().size() == 1);
  CHECK(CycleIndexPoly::atom(5).coeff(ct({{1, 1}})) == 1);
}

TEST_CASE("specialize z_set counts one multiset of atoms per size") {
  auto p = specialize_ogf(z_set(12));
  for (std::size_t n = 0; n <= 12; ++n) CHECK(p[n] == 1);
}

TEST_CASE("z_seq") {
  auto z = z_seq(2);
  CHECK(z.terms().size() == 3);
  for (unsigned k = 0; k <= 2; ++k) {
    CHECK(z.coeff(k == 0 ? CycleType() : ct({{1, k}})) == 1);
  }
  auto g = specialize_ogf(z_seq(10));
  for (std::size_t n = 0; n <= 10; ++n) CHECK(g[n] == 1);
  auto d = derivative_z1(z_seq(6));
  CHECK(d.truncation() == 5);
  for (unsigned k = 0; k <= 5; ++k) {
    CHECK(d.coeff(k == 0 ? CycleType() : ct({{1, k}})) == static_cast<long>(k + 1));
  }
}

TEST_CASE("derivative_z1") {
  auto d = derivative_z1(z_set(8));
  CHECK(d == z_set(7));
  CHECK(d.terms() == z_set(7).terms());

  auto z1z2 = CycleIndexPoly::from_terms({{ct({{1, 1}, {2, 1}}), Rational(1)}}, 5);
  auto dz = derivative_z1(z1z2);
  CHECK(dz.terms().size() == 1);
  CHECK(dz.coeff(ct({{2, 1}})) == 1);

  auto cube = CycleIndexPoly::from_terms({{ct({{1, 3}}), Rational(1)}}, 5);
  auto dd = derivative_z1(derivative_z1(cube));
  CHECK(dd.terms().size() == 1);
  CHECK(dd.coeff(ct({{1, 1}})) == 6);
}

TEST_CASE("plethysm_with_weights") {
  auto atoms = plethysm_with_weights(z_set(12), [](std::size_t) { return monomial_z(12); });
  CHECK(atoms == TruncatedSeries(std::vector<Rational>(13, Rational(1))));

  // Multisets of positive integers: partitions.
  auto parts = plethysm_with_weights(z_set(12), [](std::size_t) { return positive_integers(12); });
  for (int n = 0; n <= 12; ++n) {
    CHECK(parts[static_cast<std::size_t>(n)] ==
          static_cast<long>(oracle::partitions(n).size()));
  }

  // SET o (Polya trees): multisets of brute-force enumerated trees.
  auto trees = oracle::rooted_trees(8);
  std::vector<BigInt> per_size(9, 0);
  for (std::size_t s = 1; s <= 8; ++s) per_size[s] = static_cast<unsigned long>(trees[s].size());
  auto tseries = polya_series(8);
  auto forests = plethysm_with_weights(z_set(8), [&](std::size_t) { return tseries; });
  const long expected[] = {1, 1, 2, 4, 9, 20, 48};
  for (int n = 0; n <= 6; ++n) {
    CHECK(forests[static_cast<std::size_t>(n)] == expected[n]);
    CHECK(forests[static_cast<std::size_t>(n)] == Rational(oracle::multiset_count(per_size, n)));
  }

  // Sequences of positive integers: compositions, 2^{n-1}.
  auto comps = plethysm_with_weights(z_seq(15), [](std::size_t) { return positive_integers(15); });
  CHECK(comps[0] == 1);
  for (int n = 1; n <= 15; ++n) {
    CHECK(comps[static_cast<std::size_t>(n)] == (1L << (n - 1)));
  }

  CHECK_THROWS_AS(plethysm_with_weights(z_set(5), [](std::size_t) {
                    return TruncatedSeries::one(5);
                  }),
                  InnerHasConstantTerm);
}

TEST_CASE("sparse and factored plethysm agree") {
  auto zf = z_set(14);
  auto sparse = CycleIndexPoly::from_terms(zf.terms(), 14);
  CHECK_FALSE(sparse.is_factored());
  auto tseries = polya_series(14);
  auto family = [&](std::size_t) { return tseries; };
  CHECK(plethysm_with_weights(zf, family) == plethysm_with_weights(sparse, family));

  auto zq = derivative_z1(scale_atoms(z_seq(14), Rational(1, 3)));
  auto zq_sparse = CycleIndexPoly::from_terms(zq.terms(), zq.truncation());
  CHECK(plethysm_with_weights(zq, family) == plethysm_with_weights(zq_sparse, family));
}

TEST_CASE("specialize z_set equals the exponential of the log series") {
  const std::size_t n = 30;
  std::vector<Rational> c(n + 1, Rational(0));
  for (std::size_t i = 1; i <= n; ++i) c[i] = Rational(1, static_cast<long>(i));
  CHECK(specialize_ogf(z_set(n)) == exp_series(TruncatedSeries(c)));
}

TEST_CASE("multiset formula: plethysm equals exp of the power sums") {
  const std::size_t n = 60;
  auto g = polya_series(n);
  auto lhs = plethysm_with_weights(z_set(n), [&](std::size_t) { return g; });
  TruncatedSeries sum(n);
  for (std::size_t i = 1; i <= n; ++i) {
    sum = add(sum, scale(substitute_power(g, i), Rational(1, static_cast<long>(i))));
  }
  CHECK(lhs == exp_series(sum));
}

TEST_CASE("derived composition matches direct enumeration") {
  // (SEQ)' o T: sequences of trees with one *-position; counted from lists.
  const int max_n = 6;
  auto trees = oracle::rooted_trees(max_n);
  std::vector<std::vector<std::string>> seqs(max_n + 1);
  seqs[0].push_back("");
  for (int n = 1; n <= max_n; ++n) {
    for (int s = 1; s <= n; ++s) {
      for (const auto& head : trees[static_cast<std::size_t>(s)]) {
        for (const auto& tail : seqs[static_cast<std::size_t>(n - s)]) {
          seqs[static_cast<std::size_t>(n)].push_back(head + "|" + tail);
        }
      }
    }
  }
  std::vector<std::set<std::string>> marked(max_n + 1);
  for (int a = 0; a <= max_n; ++a) {
    for (int b = 0; a + b <= max_n; ++b) {
      for (const auto& l : seqs[static_cast<std::size_t>(a)]) {
        for (const auto& r : seqs[static_cast<std::size_t>(b)]) {
          marked[static_cast<std::size_t>(a + b)].insert(l + "*" + r);
        }
      }
    }
  }
  auto g = polya_series(max_n);
  auto derived = plethysm_with_weights(derivative_z1(z_seq(max_n + 1)),
                                       [&](std::size_t) { return g; });
  for (int n = 0; n <= max_n; ++n) {
    CHECK(derived[static_cast<std::size_t>(n)] ==
          static_cast<long>(marked[static_cast<std::size_t>(n)].size()));
  }

  // (SET)' = SET: forests.
  auto forests = plethysm_with_weights(z_set(max_n), [&](std::size_t) { return g; });
  auto derived_set = plethysm_with_weights(derivative_z1(z_set(max_n + 1)),
                                           [&](std::size_t) { return g; });
  CHECK(derived_set == forests);
}

TEST_CASE("specialize a single z_2 term") {
  auto z = CycleIndexPoly::from_terms({{ct({{2, 1}}), Rational(1, 2)}}, 6);
  auto s = specialize_ogf(z);
  CHECK(s == TruncatedSeries::monomial(2, Rational(1, 2), 6));
}

TEST_CASE("evaluate_at with residuals") {
  const std::size_t n = 60;
  std::vector<long double> args;
  for (std::size_t i = 1; i <= n; ++i) args.push_back(std::pow(0.5L, static_cast<long double>(i)));
  auto e = evaluate_at(z_set(n), args);
  CHECK(std::fabs(static_cast<double>(e.value) - 2.0) < 1e-12);
  CHECK(e.residual >= 0);
  CHECK(e.residual < 1e-6);

  auto q = evaluate_at(z_seq(n), {1.0L / 3});
  CHECK(std::fabs(static_cast<double>(q.value) - 1.5) < 1e-15);

  // Sparse and factored evaluation agree.
  auto zs = z_set(20);
  auto sparse = CycleIndexPoly::from_terms(zs.terms(), 20);
  auto a = evaluate_at(zs, args);
  auto b = evaluate_at(sparse, args);
  CHECK(std::fabs(static_cast<double>(a.value - b.value)) < 1e-15);
}

TEST_CASE("reweighting and power sums agree between representations") {
  auto z = mul(z_set(12), z_seq(12));
  CHECK(z.is_factored());
  auto sparse = CycleIndexPoly::from_terms(z.terms(), 12);
  CHECK(mul(z_set(12), z_seq(12)).terms() ==
        mul(CycleIndexPoly::from_terms(z_set(12).terms(), 12), z_seq(12)).terms());
  CHECK(scale_atoms(z, Rational(2, 3)).terms() == scale_atoms(sparse, Rational(2, 3)).terms());
  for (unsigned k : {1u, 2u, 3u}) {
    CHECK(power_sum_substitute(z, k).terms() == power_sum_substitute(sparse, k).terms());
  }
  CHECK(add(z, z).terms() == scale(z, Rational(2)).terms());
}

TEST_CASE("multivariate plethysm") {
  // SET o ATOM = SET.
  auto z = plethysm(z_set(8), [](std::size_t) { return CycleIndexPoly::atom(8); });
  CHECK(z.terms() == z_set(8).terms());
  // SEQ o SET_{>=1}: specialization counts sequences of nonempty multisets of
  // atoms, i.e. compositions.
  auto nonempty = CycleIndexPoly::from_terms(
      [] {
        auto t = z_set(8).terms();
        t.erase(CycleType());
        return t;
      }(),
      8);
  auto comp = specialize_ogf(plethysm(z_seq(8), [&](std::size_t) { return nonempty; }));
  for (std::size_t n = 1; n <= 8; ++n) CHECK(comp[n] == (1L << (n - 1)));
  CHECK_THROWS_AS(plethysm(z_set(4), [](std::size_t) { return z_set(4); }), InnerHasConstantTerm);
}

TEST_CASE("json layout") {
  auto z = z_set(2);
  auto j = z.to_json();
  CHECK(j.size() == 4);
  bool found = false;
  for (const auto& e : j) {
    if (e["cycle_type"] == nlohmann::json{{"2", 1}}) {
      CHECK(e["coeff"] == "1/2");
      found = true;
    }
  }
  CHECK(found);
  CHECK(CycleIndexPoly::from_json(j, 2).terms() == z.terms());
  CHECK_THROWS_AS(z_set(CycleIndexPoly::kMaxExpandedTruncation + 1).terms(), SizeGuardExceeded);
}
