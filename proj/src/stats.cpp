#include "gibbs/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <mutex>
#include <thread>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

double num(long double v) { return static_cast<double>(v); }

nlohmann::json tv_json(const TvEstimate& tv) {
  return {{"tv", num(tv.distance)},
          {"radius", num(tv.radius)},
          {"lower", num(tv.lower)},
          {"upper", num(tv.upper)},
          {"tail_term", num(tv.tail_term)},
          {"keys", tv.keys}};
}

}  // namespace

void EmpiricalLaw::add(const std::string& key, std::uint64_t count) {
  counts[key] += count;
  total += count;
}

void EmpiricalLaw::add_tail(std::uint64_t count) {
  tail_bucket += count;
  total += count;
}

void EmpiricalLaw::merge(const EmpiricalLaw& other) {
  for (const auto& [k, c] : other.counts) counts[k] += c;
  total += other.total;
  tail_bucket += other.tail_bucket;
}

TvEstimate tv_distance(const EmpiricalLaw& p, const ExactLaw& q, long double confidence,
                       long double coarse_threshold) {
  if (p.total == 0) throw PreconditionError("empty empirical law");
  if (!(confidence > 0 && confidence < 1)) throw PreconditionError("confidence must lie in (0, 1)");
  const auto m = static_cast<long double>(p.total);
  TvEstimate out;
  long double sum = 0, spread = 0;
  long double coarse_sum = 0, light_hat = 0, light_q = 0;
  std::size_t heavy = 0;
  for (const auto& [k, c] : p.counts) {
    if (!q.mass.count(k)) throw KeyMismatch("observed key " + k + " is not in the exact law");
  }
  for (const auto& [k, v] : q.mass) {
    auto it = p.counts.find(k);
    const long double ph = it == p.counts.end() ? 0 : static_cast<long double>(it->second) / m;
    sum += std::fabs(ph - v);
    spread += std::sqrt(ph * (1 - ph) / m);
    if (v >= coarse_threshold) {
      coarse_sum += std::fabs(ph - v);
      ++heavy;
    } else {
      light_hat += ph;
      light_q += v;
    }
  }
  const long double tail_hat = static_cast<long double>(p.tail_bucket) / m;
  out.tail_term = std::fabs(tail_hat - q.tail) / 2;
  spread += std::sqrt(tail_hat * (1 - tail_hat) / m);
  out.distance = sum / 2 + out.tail_term;
  out.keys = p.counts.size() + 1;

  const long double delta = 1 - confidence;
  const long double ln2 = std::log(2.0L);
  const long double l1 =
      std::sqrt((static_cast<long double>(out.keys) * ln2 + std::log(2 / delta)) / (2 * m));
  const long double plug_in = spread / 2 + std::sqrt(std::log(2 / delta) / (2 * m));
  out.radius = std::min(l1, plug_in);
  out.upper = std::min(1.0L, out.distance + std::sqrt(std::log(2 / delta) / (2 * m)));

  const long double coarse = (coarse_sum + std::fabs(light_hat - light_q)) / 2 + out.tail_term;
  const auto cells = static_cast<long double>(heavy + 2);
  const long double coarse_radius = std::sqrt((cells * ln2 + std::log(4 / delta)) / (2 * m));
  out.lower = std::max(0.0L, std::max(out.distance - out.radius, coarse - coarse_radius));
  return out;
}

TvEstimate tv_distance(const ExactLaw& p, const ExactLaw& q) {
  TvEstimate out;
  std::set<std::string> keys;
  for (const auto& [k, v] : p.mass) keys.insert(k);
  for (const auto& [k, v] : q.mass) keys.insert(k);
  long double sum = 0;
  for (const auto& k : keys) {
    auto a = p.mass.find(k);
    auto b = q.mass.find(k);
    sum += std::fabs((a == p.mass.end() ? 0 : a->second) - (b == q.mass.end() ? 0 : b->second));
  }
  out.tail_term = std::fabs(p.tail - q.tail) / 2;
  out.distance = sum / 2 + out.tail_term;
  out.keys = keys.size() + 1;
  out.lower = out.upper = out.distance;
  return out;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Rng sample_stream(std::uint64_t seed, std::size_t n, std::size_t i) {
  return stream_for(seed, (static_cast<std::uint64_t>(n) << 40) | static_cast<std::uint64_t>(i));
}

void require_lattice_size(const GibbsModel& model, std::size_t n) {
  if (n > model.truncation()) {
    throw PreconditionError("size " + std::to_string(n) + " exceeds the truncation " +
                            std::to_string(model.truncation()));
  }
  const TruncatedSeries& g = model.inner_series();
  if ((g.residue() == 0 && n % g.span() != 0) || sgn(model.composite_series()[n]) == 0) {
    throw PreconditionError("size " + std::to_string(n) + " is off the lattice of the composite");
  }
}

bool RemainderTvReport::decreasing_beyond_radii() const {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i].tv;
    const auto& b = rows[i + 1].tv;
    if (!(a.lower > b.upper)) return false;
  }
  return !rows.empty();
}

nlohmann::json RemainderTvReport::to_json() const {
  nlohmann::json out = {{"cap", cap}, {"rho", num(rho)}, {"rows", nlohmann::json::array()}};
  for (const auto& r : rows) {
    nlohmann::json row = tv_json(r.tv);
    row["n"] = r.n;
    row["samples"] = r.samples;
    row["empirical_tail"] = num(r.empirical_tail);
    row["limit_tail"] = num(r.limit_tail);
    row["mean_largest"] = num(r.mean_largest);
    out["rows"].push_back(row);
  }
  out["decreasing_beyond_radii"] = decreasing_beyond_radii();
  return out;
}

RemainderTvReport remainder_tv_experiment(const GibbsModel& model, const std::vector<std::size_t>& sizes,
                                          std::size_t samples, std::size_t cap,
                                          const ExperimentOptions& options) {
  if (samples == 0) throw PreconditionError("need at least one sample");
  for (std::size_t n : sizes) require_lattice_size(model, n);
  const LimitLaw limit = limit_remainder_distribution(model, cap);
  const ExactLaw exact = limit.law();
  RemainderTvReport rep;
  rep.cap = cap;
  rep.rho = limit.rho;
  for (std::size_t n : sizes) {
    std::vector<FragmentRecord> records(samples);
    parallel_for(samples, options.workers, [&](std::size_t i) {
      Rng rng = sample_stream(options.seed, n, i);
      records[i] = extract_remainder(sample_S_n(model, n, rng, options.method), rng);
    });
    EmpiricalLaw emp;
    long double largest = 0;
    for (const auto& r : records) {
      if (r.remainder_size <= cap) {
        emp.add(r.remainder.key());
      } else {
        emp.add_tail();
      }
      largest += static_cast<long double>(r.largest_size);
    }
    RemainderTvRow row;
    row.n = n;
    row.samples = samples;
    row.tv = tv_distance(emp, exact, options.confidence);
    row.empirical_tail = static_cast<long double>(emp.tail_bucket) / static_cast<long double>(samples);
    row.limit_tail = limit.tail;
    row.mean_largest = largest / static_cast<long double>(samples);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

nlohmann::json ComponentCountReport::to_json() const {
  nlohmann::json out = tv_json(tv);
  out["n"] = n;
  out["samples"] = samples;
  nlohmann::json table = nlohmann::json::array();
  std::set<std::string> keys;
  for (const auto& [k, c] : empirical.counts) keys.insert(k);
  for (const auto& [k, p] : limit.mass) {
    if (p > 1e-12L) keys.insert(k);
  }
  std::vector<std::string> ordered(keys.begin(), keys.end());
  std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
    return std::stoull(a) < std::stoull(b);
  });
  for (const auto& k : ordered) {
    auto c = empirical.counts.find(k);
    auto p = limit.mass.find(k);
    table.push_back({{"components", std::stoull(k)},
                     {"empirical", c == empirical.counts.end()
                                       ? 0.0
                                       : static_cast<double>(c->second) / static_cast<double>(empirical.total)},
                     {"limit", p == limit.mass.end() ? 0.0 : num(p->second)}});
  }
  out["table"] = table;
  out["limit_tail"] = num(limit.tail);
  return out;
}

ComponentCountReport component_count_experiment(const GibbsModel& model, std::size_t n,
                                                std::size_t samples, const ExperimentOptions& options) {
  if (samples == 0) throw PreconditionError("need at least one sample");
  require_lattice_size(model, n);
  ComponentCountReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.limit = limit_component_law(model);
  std::vector<std::size_t> counts(samples);
  parallel_for(samples, options.workers, [&](std::size_t i) {
    Rng rng = sample_stream(options.seed, n, i);
    counts[i] = components_of(sample_S_n(model, n, rng, options.method)).size();
  });
  for (std::size_t c : counts) {
    const std::string key = std::to_string(c);
    if (rep.limit.mass.count(key)) {
      rep.empirical.add(key);
    } else {
      rep.empirical.add_tail();
    }
  }
  rep.tv = tv_distance(rep.empirical, rep.limit, options.confidence);
  return rep;
}

TvEstimate remainder_self_test(const GibbsModel& model, std::size_t n, std::size_t samples,
                               const ExperimentOptions& options) {
  if (samples == 0) throw PreconditionError("need at least one sample");
  require_lattice_size(model, n);
  const ExactLaw exact = exact_remainder_law(model, n);
  std::vector<std::string> keys(samples);
  parallel_for(samples, options.workers, [&](std::size_t i) {
    Rng rng = sample_stream(options.seed, n, i);
    keys[i] = extract_remainder(sample_S_n(model, n, rng, options.method), rng).remainder.key();
  });
  EmpiricalLaw emp;
  for (const auto& k : keys) emp.add(k);
  return tv_distance(emp, exact, options.confidence);
}

}  // namespace gibbs
