#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "gibbs/rational.hpp"

namespace gibbs {

inline constexpr std::size_t kDefaultTruncation = 256;

/// Power series with exact non-negative rational coefficients c_0..c_N.
/// The lattice span d and residue r describe the index set of nonzero
/// coefficients: every nonzero index n satisfies n = r (mod d).
class TruncatedSeries {
 public:
  TruncatedSeries() : TruncatedSeries(0) {}
  explicit TruncatedSeries(std::size_t truncation);
  /// Truncation order is coeffs.size() - 1. Throws PreconditionError on a
  /// negative coefficient or an empty vector.
  explicit TruncatedSeries(std::vector<Rational> coeffs);

  static TruncatedSeries one(std::size_t truncation);
  static TruncatedSeries monomial(std::size_t degree, const Rational& c, std::size_t truncation);

  std::size_t truncation() const { return coeffs_.size() - 1; }
  std::size_t span() const { return span_; }
  std::size_t residue() const { return residue_; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  /// Coefficient of z^n; zero beyond the truncation order.
  const Rational& operator[](std::size_t n) const;
  bool is_zero() const { return nonzero_ == 0; }
  /// Number of nonzero coefficients.
  std::size_t support_size() const { return nonzero_; }
  /// Largest index with a nonzero coefficient (0 for the zero series).
  std::size_t last_nonzero() const { return last_; }

  /// Same coefficients cut (or zero-padded) to a new order.
  TruncatedSeries truncated(std::size_t truncation) const;

  bool operator==(const TruncatedSeries& other) const { return coeffs_ == other.coeffs_; }

  nlohmann::json to_json() const;
  static TruncatedSeries from_json(const nlohmann::json& j);

 private:
  void refresh();

  std::vector<Rational> coeffs_;
  std::size_t span_ = 1;
  std::size_t residue_ = 0;
  std::size_t nonzero_ = 0;
  std::size_t last_ = 0;
};

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries scale(const TruncatedSeries& a, const Rational& c);
/// g(z^k), truncated at the order of g.
TruncatedSeries substitute_power(const TruncatedSeries& g, std::size_t k);
/// Formal exponential; a must have zero constant term.
TruncatedSeries exp_series(const TruncatedSeries& a);

enum class TailModel {
  kGeometric,  // ratio majorant over the last window; needs the ratio < 1
  kPowerLaw,   // fitted t_n ~ n^b decay for evaluation on the boundary
  kRadiusScaled,  // fitted g_n rho^n ~ n^b times (x / rho)^n, rho estimated
};

struct Evaluation {
  long double value = 0;         // partial sum plus tail estimate
  long double partial_sum = 0;   // sum_{n <= N} g_n x^n
  long double tail = 0;          // estimate of sum_{n > N} g_n x^n
  long double tail_error = 0;    // uncertainty carried by the tail estimate
  long double ratio = 0;         // geometric model: window ratio; power law: exponent b
};

/// Float evaluation at x >= 0 with a tail estimate from the last
/// max(10, L/10) lattice terms. Throws TailNotControlled if the tail model
/// does not apply (ratio >= 1, exponent >= -1 for the power law, or x beyond
/// the estimated radius by more than its spread for the scaled model).
Evaluation evaluate(const TruncatedSeries& g, long double x,
                    TailModel model = TailModel::kGeometric);

/// Terms g_n x^n as long doubles (zero where g_n = 0).
std::vector<long double> float_terms(const TruncatedSeries& g, long double x);

struct RadiusEstimate {
  long double rho = 0;
  long double spread = 0;  // |three-parameter fit - two-parameter fit|
  std::size_t span = 1;
  std::size_t residue = 0;
  std::size_t points = 0;  // ratios used in the fit
};

/// Extrapolates (g_n / g_{n+d})^{1/d} -> rho over the last window by fitting
/// rho + a/n + b/n^2. Throws InsufficientData with fewer than 3 ratios.
RadiusEstimate radius_estimate(const TruncatedSeries& g);

/// The radius-scaled evaluation with a radius supplied by the caller, for
/// series known to share it (a composite in the subcritical regime shares the
/// radius of its inner series).
Evaluation evaluate_with_radius(const TruncatedSeries& g, long double x,
                                const RadiusEstimate& radius);

/// Indices n = residue (mod span) in [0, N], in increasing order.
std::vector<std::size_t> lattice_indices(const TruncatedSeries& g);

/// Window length used for tail and limit statistics over L lattice points.
std::size_t window_length(std::size_t lattice_points);

}  // namespace gibbs
