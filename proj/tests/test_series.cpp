#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbs/error.hpp"
#include "gibbs/series.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

TruncatedSeries from_ints(std::vector<long> v) {
  std::vector<Rational> q;
  for (long x : v) q.emplace_back(x);
  return TruncatedSeries(std::move(q));
}

TruncatedSeries polya_series(std::size_t n) {
  auto t = oracle::polya_tree_counts(n);
  std::vector<Rational> q;
  for (auto& x : t) q.emplace_back(x);
  return TruncatedSeries(std::move(q));
}

TruncatedSeries geometric(const Rational& c, std::size_t n) {
  std::vector<Rational> q;
  Rational p(1);
  for (std::size_t i = 0; i <= n; ++i, p *= c) q.push_back(p);
  return TruncatedSeries(std::move(q));
}

}  // namespace

TEST_CASE("add is coefficientwise with span recomputation") {
  CHECK(add(from_ints({1, 1, 0}), from_ints({0, 1, 0})) == from_ints({1, 2, 0}));
  auto a = from_ints({1, 3, 0, 7});
  CHECK(add(a, TruncatedSeries(3)) == a);
  auto z2 = from_ints({0, 0, 1, 0, 0});
  auto z3 = from_ints({0, 0, 0, 1, 0});
  CHECK(z2.span() == 2);
  CHECK(z3.span() == 3);
  CHECK(add(z2, z3).span() == 1);
  CHECK(add(from_ints({1, 1, 1}), from_ints({1, 1})).truncation() == 1);
}

TEST_CASE("span and residue of shifted lattices") {
  auto odd = from_ints({0, 1, 0, 2, 0, 5});
  CHECK(odd.span() == 2);
  CHECK(odd.residue() == 1);
  CHECK(TruncatedSeries(4).span() == 1);
  CHECK(from_ints({3, 0, 0}).span() == 1);
}

TEST_CASE("mul is a truncated Cauchy product") {
  CHECK(mul(from_ints({1, 1, 0}), from_ints({1, 1, 0})) == from_ints({1, 2, 1}));
  auto g = polya_series(12);
  CHECK(mul(g, TruncatedSeries::one(12)) == g);

  // Self-convolution at n = 6 against a direct double loop.
  auto t = oracle::polya_tree_counts(12);
  BigInt direct = 0;
  for (int i = 0; i <= 6; ++i) {
    for (int j = 0; j <= 6; ++j) {
      if (i + j == 6) direct += t[i] * t[j];
    }
  }
  CHECK(mul(g, g)[6] == Rational(direct));
}

TEST_CASE("substitute_power re-indexes") {
  CHECK(substitute_power(from_ints({0, 1, 0, 0}), 3) == from_ints({0, 0, 0, 1}));
  CHECK(substitute_power(from_ints({0, 1, 1, 0, 0}), 2) == from_ints({0, 0, 1, 0, 1}));
  auto g = polya_series(40);
  auto s = substitute_power(g, 2);
  for (std::size_t n = 0; n <= 40; ++n) {
    CHECK(s[n] == (n % 2 == 0 ? g[n / 2] : Rational(0)));
  }
  CHECK_THROWS_AS(substitute_power(g, 0), PreconditionError);
}

TEST_CASE("exp_series") {
  auto e = exp_series(from_ints({0, 1, 0, 0, 0}));
  CHECK(e == TruncatedSeries({Rational(1), Rational(1), Rational(1, 2), Rational(1, 6),
                              Rational(1, 24)}));
  CHECK(exp_series(TruncatedSeries(5)) == TruncatedSeries::one(5));
  CHECK_THROWS_AS(exp_series(from_ints({1, 1})), PreconditionError);

  // exp(-log(1 - z)) = 1/(1 - z); the log series is built here directly.
  const std::size_t n = 30;
  std::vector<Rational> log_coeffs(n + 1, Rational(0));
  for (std::size_t i = 1; i <= n; ++i) log_coeffs[i] = Rational(1, static_cast<long>(i));
  auto geo = exp_series(TruncatedSeries(log_coeffs));
  for (std::size_t i = 0; i <= n; ++i) CHECK(geo[i] == 1);
}

TEST_CASE("exp of a sum is the product of exps (property)") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(0, 5), den(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rational> a(9, Rational(0)), b(9, Rational(0));
    for (std::size_t i = 1; i < 9; ++i) {
      a[i] = Rational(num(rng), den(rng));
      b[i] = Rational(num(rng), den(rng));
    }
    TruncatedSeries sa(a), sb(b);
    auto lhs = exp_series(add(sa, sb));
    auto rhs = mul(exp_series(sa), exp_series(sb));
    CHECK(lhs == rhs);
    for (const auto& c : lhs.coeffs()) CHECK(sgn(c) >= 0);
  }
}

TEST_CASE("non-negativity is enforced") {
  CHECK_THROWS_AS(TruncatedSeries({Rational(1), Rational(-1)}), PreconditionError);
}

TEST_CASE("json round trip") {
  auto g = TruncatedSeries({Rational(0), Rational(2, 4), Rational(3)});
  auto j = g.to_json();
  CHECK(j["truncation"] == 2);
  CHECK(j["span"] == 1);
  CHECK(j["coeffs"][1] == "1/2");
  CHECK(j["coeffs"][2] == "3/1");
  CHECK(TruncatedSeries::from_json(j) == g);
  j["span"] = 3;
  CHECK_THROWS_AS(TruncatedSeries::from_json(j), SpecError);
}

TEST_CASE("evaluate with the geometric tail") {
  auto geo = geometric(Rational(1), 60);
  auto e = evaluate(geo, 0.5L);
  CHECK(std::fabs(static_cast<double>(e.value) - 2.0) < 1e-15);
  CHECK(e.tail > 0);
  CHECK(e.tail == doctest::Approx(static_cast<double>(std::pow(0.5L, 60))).epsilon(1e-9));

  auto z = from_ints({0, 1, 0, 0, 0, 0});
  auto ez = evaluate(z, 0.3L);
  CHECK(ez.value == doctest::Approx(0.3).epsilon(1e-18));
  CHECK(ez.tail == 0);

  CHECK_THROWS_AS(evaluate(geo, 1.0L), TailNotControlled);
  CHECK_THROWS_AS(evaluate(geo, -0.1L), PreconditionError);
}

TEST_CASE("evaluate Polya trees at 1/4 is bracketed by a longer partial sum") {
  auto small = polya_series(100);
  auto large = polya_series(200);
  auto e = evaluate(small, 0.25L);
  long double reference = evaluate(large, 0.25L).partial_sum;
  CHECK(e.partial_sum <= reference);
  CHECK(reference <= e.partial_sum + e.tail);
}

TEST_CASE("evaluate is monotone in x (property)") {
  auto g = polya_series(120);
  long double prev = -1;
  for (int i = 0; i <= 30; ++i) {
    long double x = 0.01L * i;
    long double v = evaluate(g, x).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("power-law tail recovers zeta(3)") {
  std::vector<Rational> c(801, Rational(0));
  for (long n = 1; n <= 800; ++n) c[n] = Rational(1, n * n * n);
  auto e = evaluate(TruncatedSeries(c), 1.0L, TailModel::kPowerLaw);
  CHECK(std::fabs(static_cast<double>(e.value) - 1.2020569031595942) < 1e-12);
  CHECK(e.ratio == doctest::Approx(-3.0).epsilon(1e-6));
  // A 1/n tail is not summable.
  for (long n = 1; n <= 800; ++n) c[n] = Rational(1, n);
  CHECK_THROWS_AS(evaluate(TruncatedSeries(c), 1.0L, TailModel::kPowerLaw), TailNotControlled);
}

TEST_CASE("radius_estimate") {
  auto r = radius_estimate(geometric(Rational(1), 100));
  CHECK(r.rho == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.span == 1);

  std::vector<Rational> even(101, Rational(0));
  for (std::size_t i = 0; i <= 100; i += 2) even[i] = 1;
  auto re = radius_estimate(TruncatedSeries(even));
  CHECK(re.span == 2);
  CHECK(re.rho == doctest::Approx(1.0).epsilon(1e-15));

  for (auto c : {Rational(1, 2), Rational(1, 3), Rational(2)}) {
    auto rc = radius_estimate(geometric(c, 200));
    CHECK(std::fabs(static_cast<double>(rc.rho) - 1.0 / c.get_d()) < 1e-9);
  }

  auto p400 = radius_estimate(polya_series(400));
  auto p500 = radius_estimate(polya_series(500));
  CHECK(std::fabs(static_cast<double>(p400.rho) - 0.33832) < 1e-5);
  CHECK(p400.spread < 1e-3);
  CHECK(std::fabs(static_cast<double>(p400.rho - p500.rho)) < 1e-3);

  CHECK_THROWS_AS(radius_estimate(from_ints({0, 1, 1, 0})), InsufficientData);
}
