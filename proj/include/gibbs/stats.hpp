#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbs/model.hpp"

namespace gibbs {

/// Counts per key plus a bucket for observations outside the key space.
struct EmpiricalLaw {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t tail_bucket = 0;

  void add(const std::string& key, std::uint64_t count = 1);
  void add_tail(std::uint64_t count = 1);
  void merge(const EmpiricalLaw& other);
};

struct TvEstimate {
  long double distance = 0;
  /// Half-width of a two-sided interval at the requested confidence; 0 for
  /// two exact laws.
  long double radius = 0;
  /// One-sided bounds on the TV of the sampled law at the requested
  /// confidence; tighter than distance -+ radius.
  long double lower = 0, upper = 0;
  /// |tail difference| / 2, included in distance.
  long double tail_term = 0;
  std::size_t keys = 0;
};

/// (1/2) sum |p_hat - q| over the union of keys plus the tail bucket against
/// q.tail. Throws KeyMismatch if an observed key has no entry in q. With m
/// samples, K observed keys plus the tail cell, and delta = 1 - confidence:
///
/// radius = min of
///   sqrt((K ln 2 + ln(2/delta)) / (2m))
///   (1/2) sum_k sqrt(p_hat_k (1 - p_hat_k) / m) + sqrt(ln(2/delta) / (2m))
/// (an L1 deviation bound, and a plug-in bound on E TV(p_hat, p) plus its
/// bounded-difference deviation).
///
/// upper = distance + sqrt(ln(2/delta) / (2m)): TV(., q) is convex, so the
/// mean of the estimate is at least the true distance.
///
/// lower = max(distance - radius, coarse - sqrt((C ln 2 + ln(4/delta)) / (2m)))
/// where coarse is the estimate after merging every key with q_k below
/// coarse_threshold into one cell (C cells in all). Merging can only shrink
/// TV, and the cells depend on q alone.
TvEstimate tv_distance(const EmpiricalLaw& p, const ExactLaw& q, long double confidence = 0.99L,
                       long double coarse_threshold = 1e-3L);

/// Exact TV between two laws on the union of their keys, tails compared.
TvEstimate tv_distance(const ExactLaw& p, const ExactLaw& q);

/// Runs body(i) for i in [0, count) on `workers` threads. Each index is
/// processed exactly once; callers store results by index.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

/// The RNG stream of sample i at size n.
Rng sample_stream(std::uint64_t seed, std::size_t n, std::size_t i);

struct ExperimentOptions {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  SamplingMethod method = SamplingMethod::kExactRecursive;
  long double confidence = 0.99L;
};

struct RemainderTvRow {
  std::size_t n = 0;
  std::size_t samples = 0;
  TvEstimate tv;
  /// Fraction of remainders beyond the cap.
  long double empirical_tail = 0;
  long double limit_tail = 0;
  long double mean_largest = 0;
};

struct RemainderTvReport {
  std::size_t cap = 0;
  long double rho = 0;
  std::vector<RemainderTvRow> rows;

  /// Each size's lower bound exceeds the next size's upper bound.
  bool decreasing_beyond_radii() const;
  nlohmann::json to_json() const;
};

/// Samples S_n per size, extracts remainders and compares their law (keys of
/// size <= cap, the rest in the tail bucket) with the limit law. Sizes off the
/// lattice of the composite throw PreconditionError.
RemainderTvReport remainder_tv_experiment(const GibbsModel& model, const std::vector<std::size_t>& sizes,
                                          std::size_t samples, std::size_t cap,
                                          const ExperimentOptions& options = {});

struct ComponentCountReport {
  std::size_t n = 0;
  std::size_t samples = 0;
  EmpiricalLaw empirical;
  ExactLaw limit;  // law of 1 + c(R)
  TvEstimate tv;

  nlohmann::json to_json() const;
};

/// Number of components of S_n against 1 + c(R).
ComponentCountReport component_count_experiment(const GibbsModel& model, std::size_t n,
                                                std::size_t samples,
                                                const ExperimentOptions& options = {});

/// Remainders of sampled S_n against the exact remainder law at n, by
/// enumeration (small n only).
TvEstimate remainder_self_test(const GibbsModel& model, std::size_t n, std::size_t samples,
                               const ExperimentOptions& options = {});

/// Throws PreconditionError unless the composite has objects of size n.
void require_lattice_size(const GibbsModel& model, std::size_t n);

}  // namespace gibbs
