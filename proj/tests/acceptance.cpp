// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gibbs/asymptotics.hpp"
#include "gibbs/cli.hpp"
#include "gibbs/cycle_index.hpp"
#include "gibbs/model.hpp"
#include "gibbs/stats.hpp"
#include "oracles.hpp"

using namespace gibbs;
using nlohmann::json;

namespace {

const char* kForests = "T := ATOM * SET(T); MODEL := COMPOSE(SET, T)";
constexpr double kConfidence = 0.99;

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

ModelOptions truncated_at(std::size_t n) {
  ModelOptions o;
  o.truncation = n;
  return o;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string cli_output(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = cli::run(args, out, err);
  return out.str();
}

// 1. CLI coefficients of forests against brute-force enumeration, n <= 12.
Outcome coefficients() {
  int code = 0;
  const std::string text = cli_output({"coeffs", "--spec", kForests, "--trunc", "12"}, code);
  if (code != 0) return {false, "cli exit code " + std::to_string(code)};
  std::vector<json> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(json::parse(line));
  const auto trees = oracle::rooted_trees(12);
  const long listed[] = {1, 1, 2, 4, 9, 20, 48, 115, 286, 719};
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    const json& r = rows.at(n + 1);
    if (r["inner"] != std::to_string(trees[n].size())) return {false, "inner differs at n=" + std::to_string(n)};
    if (n <= 10 && r["inner"] != std::to_string(listed[n - 1])) {
      return {false, "inner differs from the listed counts at n=" + std::to_string(n)};
    }
    if (r["composite"] != std::to_string(oracle::forests(n).size())) {
      return {false, "composite differs at n=" + std::to_string(n)};
    }
    ++checked;
  }
  return {true, std::to_string(checked) + " sizes, inner and composite exact"};
}

// 2. Z_SET(G(z), G(z^2), ...) from the factored cycle index against
// exp(sum_i G(z^i) / i), exactly, to n = 200.
Outcome two_paths() {
  const std::size_t n = 200;
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(n));
  const TruncatedSeries& g = m.inner_series();
  const TruncatedSeries pleth = plethysm_with_weights(z_set(n), [&](std::size_t) { return g; });
  TruncatedSeries sum(n);
  for (std::size_t i = 1; i <= n; ++i) {
    sum = add(sum, scale(substitute_power(g, i), Rational(1, static_cast<long>(i))));
  }
  const TruncatedSeries expf = exp_series(sum);
  for (std::size_t k = 0; k <= n; ++k) {
    if (pleth[k] != expf[k]) return {false, "paths differ at n=" + std::to_string(k)};
    if (pleth[k] != m.composite_series()[k]) return {false, "engine differs at n=" + std::to_string(k)};
  }
  return {true, "201 coefficients equal (and equal to the engine's composite series)"};
}

// 3. Rejection sampler at n = 8, 1e5 draws, against the enumerated law.
Outcome sampler_law() {
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(64));
  const ExactLaw exact = exact_composite_law(m, 8);
  const std::size_t draws = 100000;
  std::vector<std::string> keys(draws);
  parallel_for(draws, workers(), [&](std::size_t i) {
    Rng rng = sample_stream(3, 8, i);
    keys[i] = canonicalize(sample_S_n(m, 8, rng, SamplingMethod::kRejection)).key();
  });
  EmpiricalLaw emp;
  for (const auto& k : keys) emp.add(k);
  const TvEstimate tv = tv_distance(emp, exact, kConfidence);
  return {tv.distance < tv.radius, "orbits " + std::to_string(exact.mass.size()) + ", tv " +
                                       fmt("%.5f", double(tv.distance)) + " < radius " +
                                       fmt("%.5f", double(tv.radius))};
}

// 4. Coefficient ratio for forests at N = 800.
Outcome coefficient_ratio() {
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(800));
  const RatioReport r = coefficient_ratio_experiment(m);
  const bool ok = r.deviation < 0.02 && r.deviation < r.deviation_half && r.constant_agreement < 1e-6;
  return {ok, "C " + fmt("%.8f", double(r.constant)) + ", deviation " + fmt("%.5f", double(r.deviation)) +
                  " (N/2 window " + fmt("%.5f", double(r.deviation_half)) + "), agreement " +
                  fmt("%.2e", double(r.constant_agreement))};
}

// 5. Remainder TV decreasing over n in {20, 40, 80} beyond the confidence
// bounds.
Outcome remainder_trend() {
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(256));
  ExperimentOptions o;
  o.seed = 5;
  o.workers = workers();
  o.confidence = kConfidence;
  const RemainderTvReport rep = remainder_tv_experiment(m, {20, 40, 80}, 100000, 12, o);
  std::string detail;
  for (const auto& row : rep.rows) {
    detail += "n=" + std::to_string(row.n) + " tv " + fmt("%.4f", double(row.tv.distance)) + " [" +
              fmt("%.4f", double(row.tv.lower)) + ", " + fmt("%.4f", double(row.tv.upper)) + "]; ";
  }
  return {rep.decreasing_beyond_radii(), detail};
}

// 6. Component counts: TV at n = 40 below n = 20, limit law normalized.
Outcome component_counts() {
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(800));
  const ExactLaw law = limit_component_law(m);
  const double total = static_cast<double>(law.total());
  ExperimentOptions o;
  o.seed = 6;
  o.workers = workers();
  o.confidence = kConfidence;
  const auto a = component_count_experiment(m, 20, 100000, o);
  const auto b = component_count_experiment(m, 40, 100000, o);
  const bool ok = b.tv.distance < a.tv.distance && std::fabs(total - 1) <= 1e-6;
  return {ok, "tv n=20 " + fmt("%.5f", double(a.tv.distance)) + ", n=40 " + fmt("%.5f", double(b.tv.distance)) +
                  "; total mass " + fmt("%.10f", total)};
}

// 7. Monte Carlo pgf at (0.7, 0.9) against the cycle-index formula.
Outcome pgf() {
  GibbsModel m(SpeciesSpec::parse(kForests), truncated_at(256));
  Rng rng = stream_for(7, 0);
  const PgfReport r = cycle_statistics_pgf_check(m, 0.7L, 0.9L, 100000, rng);
  const double gap = std::fabs(double(r.estimate - r.exact));
  return {gap < 3 * double(r.standard_error),
          "estimate " + fmt("%.6f", double(r.estimate)) + ", exact " + fmt("%.6f", double(r.exact)) + ", " +
              fmt("%.2f", gap / double(r.standard_error)) + " standard errors"};
}

// 8. Diagnostics for g_n = n^-3 2^-n.
Outcome diagnostics() {
  const std::size_t n_max = 800;
  std::vector<Rational> c(n_max + 1, Rational(0));
  for (std::size_t n = 1; n <= n_max; ++n) {
    BigInt den, b;
    mpz_ui_pow_ui(den.get_mpz_t(), n, 3);
    mpz_ui_pow_ui(b.get_mpz_t(), 2, n);
    c[n] = ratio(BigInt(1), den * b);
  }
  const SubexpReport r = diagnose_subexponential(TruncatedSeries(c));
  const long double ratio_target = std::pow(r.radius.rho, static_cast<long double>(r.radius.span));
  const long double ratio_400 = window_deviation(r.ratio_track, ratio_target, 400);
  const long double conv_400 = window_deviation(r.convolution_track, 2 * r.g_at_rho, 400);
  const bool ok = std::fabs(double(r.radius.rho) - 2) < 1e-3 && r.ratio_deviation < ratio_400 &&
                  r.convolution_deviation < conv_400;
  return {ok, "rho " + fmt("%.6f", double(r.radius.rho)) + ", ratio deviation " + fmt("%.5f", double(ratio_400)) +
                  " -> " + fmt("%.5f", double(r.ratio_deviation)) + ", convolution " +
                  fmt("%.5f", double(conv_400)) + " -> " + fmt("%.5f", double(r.convolution_deviation))};
}

// 9. Identical transcripts across runs and worker counts.
Outcome determinism() {
  std::string detail;
  for (const char* method : {"exact_recursive", "rejection"}) {
    const std::vector<std::string> base = {"sample", "--spec",  kForests, "--sizes", "20,40",
                                           "--samples", "2000", "--seed", "42",    "--method",
                                           method,   "--trunc", "128"};
    std::vector<std::string> runs;
    for (const char* w : {"1", "1", "4", "4"}) {
      auto args = base;
      args.insert(args.end(), {"--workers", w});
      int code = 0;
      runs.push_back(cli_output(args, code));
      if (code != 0) return {false, std::string(method) + ": exit code " + std::to_string(code)};
    }
    for (const auto& r : runs) {
      if (r != runs[0]) return {false, std::string(method) + ": transcripts differ"};
    }
    detail += std::string(method) + " " + std::to_string(runs[0].size()) + " bytes x4; ";
  }
  return {true, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::function<Outcome()> run;
    double budget_seconds;  // 0: none
  };
  const Criterion criteria[] = {
      {1, coefficients, 10},  {2, two_paths, 60},          {3, sampler_law, 300},
      {4, coefficient_ratio, 300},{5, remainder_trend, 0},     {6, component_counts, 0},
      {7, pgf, 0},            {8, diagnostics, 0},         {9, determinism, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += " (over the " + fmt("%.0f", c.budget_seconds) + " s budget)";
    }
    std::printf("criterion %d: %s  %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
