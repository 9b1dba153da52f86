#include <doctest.h>

#include <cmath>

#include "gibbs/asymptotics.hpp"
#include "gibbs/error.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

const char* kForests = "T := ATOM * SET(T); MODEL := COMPOSE(SET, T)";
const char* kHalfSeq =
    "T := ATOM * SET(T); MODEL := COMPOSE(WEIGHTED(SEQ, ATOM_MULTIPLICATIVE(1/2)), T)";

// g_n = n^-power * base^-n for n >= 1.
TruncatedSeries power_series(std::size_t n_max, unsigned power, unsigned base) {
  std::vector<Rational> c(n_max + 1, Rational(0));
  for (std::size_t n = 1; n <= n_max; ++n) {
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(n), power);
    BigInt b;
    mpz_ui_pow_ui(b.get_mpz_t(), base, static_cast<unsigned long>(n));
    c[n] = ratio(BigInt(1), den * b);
  }
  return TruncatedSeries(c);
}

ModelOptions truncated_at(std::size_t n) {
  ModelOptions o;
  o.truncation = n;
  return o;
}

constexpr double kZeta3 = 1.2020569031595942;

}  // namespace

TEST_CASE("window_deviation") {
  Track t;
  for (std::size_t n = 1; n <= 100; ++n) t.emplace_back(n, 1 + 1.0L / n);
  CHECK(static_cast<double>(window_deviation(t, 1, 100)) == doctest::Approx(1.0 / 91));
  CHECK(static_cast<double>(window_deviation(t, 1, 50)) == doctest::Approx(1.0 / 41));
  CHECK(std::isinf(static_cast<double>(window_deviation(t, 0, 100))));
  CHECK(std::isinf(static_cast<double>(window_deviation({}, 1, 100))));
}

TEST_CASE("n^-3 2^-n has radius 2 and both deviations shrink") {
  const TruncatedSeries g = power_series(800, 3, 2);
  SubexpReport full = diagnose_subexponential(g);
  SubexpReport half = diagnose_subexponential(g.truncated(400));
  MESSAGE("rho=" << double(full.radius.rho) << " ratio dev " << double(half.ratio_deviation) << " -> "
                 << double(full.ratio_deviation) << ", conv dev " << double(half.convolution_deviation)
                 << " -> " << double(full.convolution_deviation));
  CHECK(std::fabs(static_cast<double>(full.radius.rho) - 2) < 1e-3);
  CHECK(full.radius.span == 1);
  CHECK(static_cast<double>(full.g_at_rho) == doctest::Approx(kZeta3).epsilon(1e-6));
  CHECK(full.ratio_deviation < half.ratio_deviation);
  CHECK(full.convolution_deviation < half.convolution_deviation);
  CHECK(full.ratio_track.size() == 799);
  CHECK(full.convolution_track.size() == 800);
  CHECK(full.to_json()["ratio_track"].size() == 799);
}

TEST_CASE("n^-2: the convolution deviation shrinks from N = 200 to 800") {
  const TruncatedSeries g = power_series(800, 2, 1);
  SubexpReport a = diagnose_subexponential(g.truncated(200));
  SubexpReport b = diagnose_subexponential(g);
  MESSAGE("conv dev " << double(a.convolution_deviation) << " -> " << double(b.convolution_deviation));
  CHECK(static_cast<double>(b.radius.rho) == doctest::Approx(1).epsilon(1e-3));
  CHECK(b.convolution_deviation < a.convolution_deviation);
}

TEST_CASE("the geometric series is flagged") {
  TruncatedSeries g(std::vector<Rational>(300, Rational(1)));
  SubexpReport r = diagnose_subexponential(g);
  CHECK(static_cast<double>(r.radius.rho) == doctest::Approx(1));
  CHECK(static_cast<double>(r.ratio_deviation) < 1e-15);
  CHECK(std::isinf(static_cast<double>(r.g_at_rho)));
  CHECK(std::isinf(static_cast<double>(r.convolution_deviation)));
  CHECK(r.verdict_hint.find("not appear finite") != std::string::npos);
}

TEST_CASE("diagnostics on Polya trees") {
  std::vector<Rational> c;
  for (const auto& t : oracle::polya_tree_counts(800)) c.emplace_back(t);
  SubexpReport r = diagnose_subexponential(TruncatedSeries(c));
  MESSAGE("trees: ratio dev " << double(r.ratio_deviation) << " conv dev " << double(r.convolution_deviation)
                              << " T(rho) " << double(r.g_at_rho));
  CHECK(r.ratio_deviation < 0.05);
  CHECK(r.convolution_deviation < 0.05);
  CHECK(static_cast<double>(r.g_at_rho) == doctest::Approx(1).epsilon(1e-5));
}

TEST_CASE("too few coefficients") {
  CHECK_THROWS_AS(diagnose_subexponential(power_series(15, 2, 1)), InsufficientData);
  TruncatedSeries sparse(std::vector<Rational>(100, Rational(0)));
  CHECK_THROWS_AS(diagnose_subexponential(sparse), InsufficientData);
}

TEST_CASE("closure under composition") {
  const TruncatedSeries g = power_series(800, 3, 1);
  SUBCASE("identity") {
    TruncatedSeries f = TruncatedSeries::monomial(1, 1, 800);
    ClosureReport r = check_closure_under_composition(f, g);
    CHECK(static_cast<double>(r.target) == doctest::Approx(1));
    CHECK(static_cast<double>(r.deviation) < 1e-15);
  }
  SUBCASE("square of Polya trees tends to 2 T(rho)") {
    std::vector<Rational> c;
    for (const auto& t : oracle::polya_tree_counts(400)) c.emplace_back(t);
    ClosureReport r =
        check_closure_under_composition(TruncatedSeries::monomial(2, 1, 400), TruncatedSeries(c));
    MESSAGE("x^2 o trees: dev " << double(r.deviation));
    CHECK(static_cast<double>(r.target) == doctest::Approx(2 * static_cast<double>(r.g_at_rho)));
    CHECK(r.deviation < 0.05);
  }
  SUBCASE("exp of sum n^-3 z^n") {
    std::vector<Rational> e(801);
    for (unsigned long k = 0; k <= 800; ++k) e[k] = 1 / oracle::factorial(k);
    ClosureReport r = check_closure_under_composition(TruncatedSeries(e), g);
    MESSAGE("exp o g: dev " << double(r.deviation) << " target " << double(r.target));
    CHECK(static_cast<double>(r.target) == doctest::Approx(std::exp(kZeta3)).epsilon(1e-6));
    CHECK(r.deviation < 0.05);
  }
}

TEST_CASE("coefficient ratio experiment") {
  SUBCASE("forests at N = 800") {
    GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(800));
    RatioReport r = coefficient_ratio_experiment(m);
    MESSAGE("forests: C=" << double(r.constant) << " series " << double(r.constant_from_series) << " dev "
                          << double(r.deviation) << " half " << double(r.deviation_half));
    CHECK(r.constant_agreement < 1e-6);
    CHECK(r.deviation < 0.02);
    CHECK(r.deviation < r.deviation_half);
    // (SET)' = SET: the constant is the forest series at rho.
    const long double forests = m.series_evaluation(m.composite_series(), m.rho()).value;
    CHECK(static_cast<double>(r.constant / forests) == doctest::Approx(1).epsilon(1e-6));
    CHECK(r.to_json()["ratio_track"].size() == 800);
  }
  SUBCASE("half-weighted sequences of trees") {
    GibbsModel m(SpeciesSpec::parse(kHalfSeq), truncated_at(400));
    RatioReport r = coefficient_ratio_experiment(m);
    // d/dz_1 of 1 / (1 - z_1 / 2) at T(rho) = 1.
    CHECK(static_cast<double>(r.constant) == doctest::Approx(2).epsilon(1e-4));
    CHECK(r.constant_agreement < 1e-5);
    CHECK(r.deviation < r.deviation_half);
  }
  SUBCASE("a polynomial inner species is refused") {
    GibbsModel m(SpeciesSpec::parse("MODEL := COMPOSE(SET, ATOM)"), truncated_at(64));
    CHECK_THROWS_AS(coefficient_ratio_experiment(m), InnerNotSubexponential);
  }
}

TEST_CASE("outer margin probe") {
  SUBCASE("forests stay finite") {
    GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(256));
    ProbeReport r = outer_margin_probe(m, {1e-3L, 1e-2L});
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
      CHECK_FALSE(row.diverging);
      CHECK(row.residual < 1e-6);
      CHECK(std::isfinite(static_cast<double>(row.value)));
    }
    CHECK(r.rows[1].value > r.rows[0].value);
  }
  SUBCASE("sequences of trees diverge at T(rho) + eps >= 1") {
    GibbsModel m(SpeciesSpec::parse("T := ATOM * SET(T); MODEL := COMPOSE(SEQ, T)"), truncated_at(256));
    ProbeReport r = outer_margin_probe(m, {1e-3L});
    CHECK(r.rows.at(0).diverging);
  }
}
