#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gibbs/rational.hpp"
#include "gibbs/series.hpp"

namespace gibbs {

/// Cycle type of a permutation: i -> m_i, the number of i-cycles. Only
/// nonzero multiplicities are stored.
class CycleType {
 public:
  CycleType() = default;
  explicit CycleType(std::map<unsigned, unsigned> multiplicities);

  unsigned operator[](unsigned i) const;
  const std::map<unsigned, unsigned>& multiplicities() const { return m_; }
  /// Weighted degree sum_i i * m_i.
  std::size_t degree() const;
  /// Total number of cycles.
  std::size_t cycles() const;
  void add(unsigned i, unsigned count = 1);

  auto operator<=>(const CycleType&) const = default;

  nlohmann::json to_json() const;
  static CycleType from_json(const nlohmann::json& j);

 private:
  std::map<unsigned, unsigned> m_;
};

/// Truncated cycle index sum in z_1, z_2, ... (z_i has degree i); only cycle
/// types of weighted degree <= N are kept.
///
/// Two representations share one interface. The sparse form stores every
/// term. The factored form stores prod_i f_i(z_i) with univariate factors and
/// covers SET, SEQ, single atoms, products and derivatives of those, and the
/// atom-multiplicative reweighting; it keeps large truncation orders cheap.
class CycleIndexPoly {
 public:
  using Terms = std::map<CycleType, Rational>;

  explicit CycleIndexPoly(std::size_t truncation = 0);
  static CycleIndexPoly from_terms(const Terms& terms, std::size_t truncation);
  /// factors[i][m] is the coefficient of z_i^m in the i-th factor; factors[0]
  /// is ignored and missing factors are 1.
  static CycleIndexPoly from_factors(std::vector<std::vector<Rational>> factors,
                                     std::size_t truncation);
  static CycleIndexPoly one(std::size_t truncation);
  /// The single-atom cycle index z_1.
  static CycleIndexPoly atom(std::size_t truncation);

  std::size_t truncation() const { return truncation_; }
  bool is_factored() const { return factors_.has_value(); }
  /// Univariate factors (only for the factored form).
  const std::vector<std::vector<Rational>>& factors() const { return *factors_; }

  Rational coeff(const CycleType& t) const;
  /// All terms. The factored form is expanded on demand; expansion is refused
  /// with SizeGuardExceeded above kMaxExpandedTruncation.
  const Terms& terms() const;
  static constexpr std::size_t kMaxExpandedTruncation = 40;

  /// Sum of the coefficients of each degree-k slice (all z_i set to 1).
  std::vector<Rational> degree_sums() const;

  CycleIndexPoly truncated(std::size_t truncation) const;

  nlohmann::json to_json() const;
  static CycleIndexPoly from_json(const nlohmann::json& j, std::size_t truncation);

  bool operator==(const CycleIndexPoly& other) const;

 private:
  std::size_t truncation_;
  std::optional<std::vector<std::vector<Rational>>> factors_;
  mutable std::optional<Terms> terms_;
  // Guards the lazy expansion of the factored form.
  std::shared_ptr<std::mutex> expand_lock_ = std::make_shared<std::mutex>();
};

CycleIndexPoly z_set(std::size_t truncation);
CycleIndexPoly z_seq(std::size_t truncation);

CycleIndexPoly add(const CycleIndexPoly& a, const CycleIndexPoly& b);
CycleIndexPoly mul(const CycleIndexPoly& a, const CycleIndexPoly& b);
CycleIndexPoly scale(const CycleIndexPoly& a, const Rational& c);
/// d/dz_1; the truncation order drops by one.
CycleIndexPoly derivative_z1(const CycleIndexPoly& z);
/// z_i -> c^i z_i: the atom-multiplicative weight c^{|F|}.
CycleIndexPoly scale_atoms(const CycleIndexPoly& z, const Rational& c);
/// z_i -> z_{k i}.
CycleIndexPoly power_sum_substitute(const CycleIndexPoly& z, unsigned k);

/// Inner family i -> G^{nu^i}(z), given as an ordinary series in z; the
/// substitution z -> z^i happens inside plethysm_with_weights.
using SeriesFamily = std::function<TruncatedSeries(std::size_t i)>;
/// Inner family i -> Z_{G^{nu^i}} for multivariate composition.
using CycleIndexFamily = std::function<CycleIndexPoly(std::size_t i)>;

/// Z_F(G_1(z), G_2(z^2), G_3(z^3), ...) truncated at min(N_F, N_G). Throws
/// InnerHasConstantTerm if some G_i has a nonzero constant term.
TruncatedSeries plethysm_with_weights(const CycleIndexPoly& zf, const SeriesFamily& inner);

/// Multivariate composition Z_F[Z_G]: z_i -> p_i[Z_{G^{nu^i}}]. Sparse only.
/// The truncation is min(N_F, N of inner(1)); inner(i) needs degrees up to
/// that bound divided by i.
CycleIndexPoly plethysm(const CycleIndexPoly& zf, const CycleIndexFamily& inner);

/// z_i -> z^i.
TruncatedSeries specialize_ogf(const CycleIndexPoly& z);

struct CycleIndexEvaluation {
  long double value = 0;
  /// value(N) - value(compare_at): mass in the degree slices above compare_at.
  long double residual = 0;
  /// slices[k] = sum of the degree-k terms at the given arguments.
  std::vector<long double> slices;
};

struct ResidualPolicy {
  /// Truncation used for the comparison evaluation; 0 means N/2.
  std::size_t compare_at = 0;
};

/// Numeric evaluation with z_i -> args[i-1] (missing arguments are 0).
CycleIndexEvaluation evaluate_at(const CycleIndexPoly& z, const std::vector<long double>& args,
                                 ResidualPolicy policy = {});

}  // namespace gibbs
