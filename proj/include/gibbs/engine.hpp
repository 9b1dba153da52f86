#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gibbs/cycle_index.hpp"
#include "gibbs/object.hpp"
#include "gibbs/rational.hpp"
#include "gibbs/rng.hpp"
#include "gibbs/series.hpp"
#include "gibbs/species.hpp"

namespace gibbs {

inline constexpr std::size_t kDefaultEnumerationGuard = 14;

struct BoltzmannOptions {
  /// The draw is abandoned once its size exceeds this.
  std::size_t size_budget = std::numeric_limits<std::size_t>::max();
  /// Called for each object drawn for an atom of the outermost composition:
  /// (cycle length, inner object). The object appears `length` times in the
  /// result.
  std::function<void(unsigned, const Object&)> on_component;
};

/// Counting, enumeration, unranking and Boltzmann sampling for expressions
/// over the definitions of one SpeciesSpec.
///
/// Coefficients are produced lazily, one index at a time, for each
/// (expression, composition context, weight power). A recursion that asks for
/// a coefficient it is still computing is ill-founded. All public members
/// lock one internal mutex, so an Engine can be shared between threads.
class Engine {
 public:
  explicit Engine(SpeciesSpec spec, std::size_t eval_truncation = kDefaultTruncation);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const SpeciesSpec& spec() const;
  /// Truncation used for float evaluation.
  std::size_t eval_truncation() const;

  /// Sum over orbits of size n of weight^power. power = 0 counts the orbits
  /// of nonzero weight.
  Rational coefficient(const ExprPtr& e, std::size_t n, unsigned power = 1);
  TruncatedSeries series(const ExprPtr& e, std::size_t truncation, unsigned power = 1);

  /// All orbits of size n with their weights, sorted by key. Throws
  /// SizeGuardExceeded when n > guard.
  std::vector<std::pair<UnlabelledObject, Rational>> enumerate(
      const ExprPtr& e, std::size_t n, std::size_t guard = kDefaultEnumerationGuard);

  /// The orbit at cumulative weight u * (total weight of size n), u in [0, 1).
  /// Carriers of compositions are kept in the returned tree.
  Object unrank(const ExprPtr& e, std::size_t n, const Rational& u);

  /// Series value at x, with the tail beyond the evaluation truncation
  /// estimated by the radius-scaled model (geometric for short series).
  Evaluation evaluation(const ExprPtr& e, long double x, unsigned power = 1);
  long double value(const ExprPtr& e, long double x, unsigned power = 1);

  /// One Boltzmann draw at x. Returns nullopt when the size budget is hit.
  std::optional<Object> boltzmann(const ExprPtr& e, long double x, Rng& rng,
                                  const BoltzmannOptions& options = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Series of spec.root() at the given power, truncated at N.
TruncatedSeries ogf(const SpeciesSpec& spec, unsigned power, std::size_t N);

std::vector<std::pair<UnlabelledObject, Rational>> enumerate(
    const SpeciesSpec& spec, std::size_t n, std::size_t guard = kDefaultEnumerationGuard);

/// Throws EmptySize when the size-n total weight is zero and
/// PreconditionError unless 0 <= u < 1.
UnlabelledObject unrank_by_weight(const SpeciesSpec& spec, std::size_t n, const Rational& u);

/// Cycle index of an expression at a weight power. SET, SEQ and ATOM (and
/// products, derivatives and reweightings of those) produce the factored
/// form; anything else is built term by term, recursion by fixpoint
/// iteration.
CycleIndexPoly cycle_index_of(const SpeciesSpec& spec, const ExprPtr& e, std::size_t N,
                              unsigned power = 1);
inline CycleIndexPoly cycle_index_of(const SpeciesSpec& spec, std::size_t N) {
  return cycle_index_of(spec, spec.root(), N);
}

}  // namespace gibbs
