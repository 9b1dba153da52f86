#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gibbs/model.hpp"
#include "gibbs/series.hpp"

namespace gibbs {

/// (n, value) pairs over lattice indices.
using Track = std::vector<std::pair<std::size_t, long double>>;

/// Largest |value / target - 1| over the last window of a track: the last
/// window_length(L) points among the L points with n <= end.
long double window_deviation(const Track& track, long double target, std::size_t end);

struct SubexpReport {
  std::size_t truncation = 0;
  RadiusEstimate radius;
  /// g_n / g_{n+d}; tends to rho^d.
  Track ratio_track;
  /// (1/g_n) sum_{i+j=n} g_i g_j; tends to 2 g(rho). Empty off residue 0.
  Track convolution_track;
  /// g(rho) with the radius-scaled tail; infinite when the tail diverges.
  long double g_at_rho = 0;
  long double g_at_rho_error = 0;
  long double ratio_deviation = 0;
  long double convolution_deviation = 0;
  std::string verdict_hint;

  nlohmann::json to_json() const;
};

/// Windowed diagnostics for the two defining limits of S_d. Needs 20 nonzero
/// lattice coefficients (InsufficientData).
SubexpReport diagnose_subexponential(const TruncatedSeries& g);

struct ClosureReport {
  /// [z^n] f(g(z)) / [z^n] g(z).
  Track ratio_track;
  long double g_at_rho = 0;
  /// f'(g(rho)).
  long double target = 0;
  long double deviation = 0;

  nlohmann::json to_json() const;
};

/// Compares [z^n] f(g) / [z^n] g with f'(g(rho)). The composition is computed
/// in floating point on g(rho z); f must have non-negative coefficients.
ClosureReport check_closure_under_composition(const TruncatedSeries& f, const TruncatedSeries& g);

struct RatioReport {
  std::size_t truncation = 0;
  long double rho = 0, spread = 0;
  /// r_n = [z^n] (F o G) / [z^n] G.
  Track ratio_track;
  /// d/dz_1 Z_F at (G(rho), G^{nu^2}(rho^2), ...).
  long double constant = 0;
  /// Mass of the upper half of the cycle-index truncation at those arguments.
  long double constant_residual = 0;
  /// (F' o G)(rho) from the series.
  long double constant_from_series = 0;
  long double constant_agreement = 0;  // |series / cycle index - 1|
  long double deviation = 0;           // window ending at N
  long double deviation_half = 0;      // window ending at N / 2

  nlohmann::json to_json() const;
};

/// Ratio of composite to inner coefficients against the asymptotic constant.
/// Throws InnerNotSubexponential when G has no finite radius estimate.
RatioReport coefficient_ratio_experiment(const GibbsModel& model);

struct ProbeRow {
  long double epsilon = 0;
  long double value = 0;
  long double residual = 0;
  bool diverging = false;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  nlohmann::json to_json() const;
};

/// Z_F(G(rho) + eps, G^{nu^2}((rho + eps)^2), ...) per eps, truncated. A
/// relative residual above 1e-6, or an argument that cannot be evaluated,
/// marks the row as diverging.
ProbeReport outer_margin_probe(const GibbsModel& model, const std::vector<long double>& epsilons);

}  // namespace gibbs
