#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/cycle_index.hpp"
#include "gibbs/engine.hpp"
#include "gibbs/object.hpp"
#include "gibbs/rng.hpp"
#include "gibbs/series.hpp"
#include "gibbs/species.hpp"

namespace gibbs {

/// A probability law on string keys. `tail` is the mass of everything not
/// listed (beyond an enumeration cap or a truncation).
struct ExactLaw {
  std::map<std::string, long double> mass;
  long double tail = 0;

  long double total() const;
};

/// P(size = n) for n <= N under the Boltzmann law of a series at y.
struct SizeDistribution {
  std::vector<long double> p;
  std::vector<long double> cumulative;
  /// Mass of the sizes above the truncation (estimated tail / value).
  long double defect = 0;
  long double normalizer = 0;

  /// A size drawn from p, conditioned on size <= N.
  std::size_t draw(Rng& rng) const;
};

SizeDistribution boltzmann_size_distribution(const TruncatedSeries& series, long double y);

/// i -> y_i, the arguments z_i of a cycle index (i >= 1).
using ArgumentFamily = std::function<long double(std::size_t)>;

/// Number of i-cycles ~ Poisson(y_i / i), independently; the sum is cut once
/// the neglected tail is below 1e-12.
CycleType sample_set_symmetry(const ArgumentFamily& args, Rng& rng);

/// Categorical law over the stored terms of a truncated cycle index:
/// P(type) proportional to coeff * prod y_i^{m_i}.
class SymmetrySampler {
 public:
  SymmetrySampler(const CycleIndexPoly& z, const ArgumentFamily& args);

  CycleType draw(Rng& rng) const;
  /// Relative mass of the degree slices above half the truncation; a proxy
  /// for the mass the truncation cut off.
  long double defect() const { return defect_; }

 private:
  std::vector<CycleType> types_;
  std::vector<long double> cumulative_;
  long double defect_ = 0;
};

CycleType sample_general_symmetry(const CycleIndexPoly& z, const ArgumentFamily& args, Rng& rng);

struct ModelOptions {
  /// Coefficients, radius estimate and evaluation use orders up to this.
  std::size_t truncation = kDefaultTruncation;
  /// Conditioned draws give up after this many rejected Boltzmann draws.
  std::size_t rejection_budget = 10'000'000;
};

/// Composite structures F o G. The root of the spec must be COMPOSE(F, G),
/// possibly behind named definitions. Immutable after construction except for
/// internal caches; share it between threads freely.
class GibbsModel {
 public:
  explicit GibbsModel(SpeciesSpec spec, ModelOptions options = {});
  /// COMPOSE(outer root, inner root) over the union of both definition sets.
  static GibbsModel compose(const SpeciesSpec& outer, const SpeciesSpec& inner,
                            ModelOptions options = {});

  const SpeciesSpec& spec() const { return spec_; }
  const ModelOptions& options() const { return options_; }
  std::size_t truncation() const { return options_.truncation; }

  const ExprPtr& outer() const { return outer_; }
  const ExprPtr& inner() const { return inner_; }
  const ExprPtr& composite() const { return composite_; }
  /// COMPOSE(DERIVE(F), G): the species of remainders.
  const ExprPtr& derived() const { return derived_; }

  Engine& engine() const { return *engine_; }

  /// G at weight power 1, F o G and F' o G, truncated at N.
  const TruncatedSeries& inner_series() const { return inner_series_; }
  const TruncatedSeries& composite_series() const { return composite_series_; }
  const TruncatedSeries& derived_series() const { return derived_series_; }
  /// Z_F at truncation N when it has a factored form, else at min(N, 24)
  /// (built on first use).
  const CycleIndexPoly& outer_cycle_index() const;

  const RadiusEstimate& radius() const { return radius_; }
  long double rho() const { return radius_.rho; }
  /// Lattice span of G.
  std::size_t span() const { return inner_series_.span(); }

  /// True when F is SET or SEQ of a single atom, unweighted.
  bool outer_is_set() const { return outer_kind_ == Op::kSet; }
  bool outer_is_seq() const { return outer_kind_ == Op::kSeq; }

  /// A series of this model (composite or derived) at x <= rho, with the tail
  /// fitted against the inner radius.
  Evaluation series_evaluation(const TruncatedSeries& s, long double x) const;

  /// y_i = G^{nu^i}(x^i) for i >= 1, evaluated on demand and cached.
  long double inner_value(std::size_t i, long double x) const;
  /// The family i -> G^{nu^i}(x^i), zero once x^i underflows the cut.
  ArgumentFamily inner_arguments(long double x) const;
  /// The same values as a vector of length N, for evaluate_at.
  std::vector<long double> inner_argument_vector(long double x) const;

  std::uint64_t digest() const { return spec_.digest(); }

 private:
  SpeciesSpec spec_;
  ModelOptions options_;
  ExprPtr outer_, inner_, composite_, derived_;
  Op outer_kind_ = Op::kZero;
  std::unique_ptr<Engine> engine_;
  TruncatedSeries inner_series_, composite_series_, derived_series_;
  RadiusEstimate radius_;

  mutable std::mutex cache_mu_;
  mutable std::optional<CycleIndexPoly> outer_index_;
  mutable std::map<std::pair<std::size_t, long double>, long double> inner_values_;
};

/// The outer symmetry of a composite draw and the inner object attached to
/// each of its cycles.
struct SymmetryDraw {
  CycleType cycle_type;
  /// (cycle length, inner object), one entry per cycle.
  std::vector<std::pair<unsigned, Object>> attachments;
  /// The assembled composite object, identical copies materialized.
  Object object;
  std::size_t size = 0;
};

/// One Boltzmann-distributed composite at y < rho. Returns nullopt if the
/// draw grows beyond size_budget.
std::optional<SymmetryDraw> sample_composite(const GibbsModel& model, long double y, Rng& rng,
                                             std::size_t size_budget = SIZE_MAX);

enum class SamplingMethod { kRejection, kExactRecursive };

std::string to_string(SamplingMethod m);
SamplingMethod parse_method(const std::string& text);

/// Argument used by rejection sampling at size n: rho (1 - 1/n)^{1/d}, moved
/// towards 0 until the composite series evaluates.
long double rejection_argument(const GibbsModel& model, std::size_t n);

/// Weight-proportional draw of a size-n composite. Carriers are kept so that
/// the components can be located.
Object sample_S_n(const GibbsModel& model, std::size_t n, Rng& rng, SamplingMethod method);

struct FragmentRecord {
  UnlabelledObject remainder;
  std::size_t remainder_size = 0;
  /// Components of the input, copies counted.
  std::size_t component_count = 0;
  std::size_t largest_size = 0;
};

/// Components of a composite object: the inner objects at its outer atoms.
std::vector<const Object*> components_of(const Object& s);

/// Removes one uniformly chosen component of maximal size and leaves a
/// *-atom in its place. Throws PreconditionError without components.
FragmentRecord extract_remainder(const Object& s, Rng& rng);

struct LimitEntry {
  UnlabelledObject remainder;
  std::size_t components = 0;
  long double p = 0;
  /// Probabilities at rho - spread and rho + spread.
  long double p_low = 0, p_high = 0;
};

struct LimitLaw {
  std::vector<LimitEntry> entries;
  long double tail = 0;
  long double normalizer = 0;  // F' o G at rho
  long double rho = 0, spread = 0;
  std::size_t cap = 0;

  ExactLaw law() const;
  long double enumerated_mass() const;
};

/// P(R = r) = w(r) rho^{|r|} / (F' o G)(rho) for every remainder orbit of
/// size <= cap, with the tail mass from the series.
LimitLaw limit_remainder_distribution(const GibbsModel& model, std::size_t cap);

/// Law of 1 + c(R), c the number of components of the limit remainder: the
/// degree slices of d/dz_1 Z_F at (G(rho), G^{nu^2}(rho^2), ...) over
/// (F' o G)(rho). Keys are decimal integers; the tail is the mass of the upper
/// half of the truncation, a bound for what lies beyond it.
ExactLaw limit_component_law(const GibbsModel& model);

/// Exact law of the remainder of S_n, by enumeration (n <= guard).
ExactLaw exact_remainder_law(const GibbsModel& model, std::size_t n,
                             std::size_t guard = kDefaultEnumerationGuard);

/// Weight-proportional law of S_n over canonical composite keys.
ExactLaw exact_composite_law(const GibbsModel& model, std::size_t n,
                             std::size_t guard = kDefaultEnumerationGuard);

/// Law of hat-S_n over canonical composite keys; the tail is the placeholder
/// mass.
ExactLaw exact_hat_S_n_law(const GibbsModel& model, std::size_t n,
                           std::size_t guard = kDefaultEnumerationGuard);

/// Composite built from a limit remainder and an inner object of the missing
/// size; nullopt is the placeholder (|R| >= n, or no inner object fits).
std::optional<Object> sample_hat_S_n(const GibbsModel& model, std::size_t n, Rng& rng);

struct PgfReport {
  long double y = 1, w = 1;
  long double estimate = 0;
  long double exact = 0;
  long double standard_error = 0;
  std::size_t samples = 0;
};

/// Monte Carlo E[y^f w^h] for the Boltzmann composite at rho (f fixpoints of
/// the outer symmetry, h total size on the other cycles) against
/// Z_F(y G(rho), G^{nu^2}(w^2 rho^2), ...) / (F o G)(rho).
PgfReport cycle_statistics_pgf_check(const GibbsModel& model, long double y, long double w,
                                     std::size_t samples, Rng& rng);

}  // namespace gibbs
