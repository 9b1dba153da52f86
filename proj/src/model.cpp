#include "gibbs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr long double kSymmetryTail = 1e-12L;
constexpr std::size_t kMaxCycleIndex = 1'000'000;
// Arguments x^i below this are treated as 0.
constexpr long double kArgumentCut = 1e-40L;
// Sparse outer cycle indices are kept at this truncation at most.
constexpr std::size_t kSparseOuterTruncation = 24;
constexpr unsigned kUnrankBits = 128;

ExprPtr resolve(const SpeciesSpec& spec, ExprPtr e) {
  for (std::size_t hops = 0; e->op == Op::kRef; ++hops) {
    if (hops > spec.names().size()) throw IllFoundedRecursion("definition cycle at the root");
    e = spec.definition(e->name);
  }
  return e;
}

std::size_t pick_index(Rng& rng, const std::vector<long double>& cumulative) {
  const long double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

std::uint64_t poisson(Rng& rng, long double mean) {
  if (mean <= 0) return 0;
  std::poisson_distribution<std::uint64_t> dist(static_cast<double>(mean));
  return dist(rng);
}

void collect_components(Object& o, std::vector<Object*>& out) {
  if (o.kind == NodeKind::kCarrier && o.tag == 1) {
    out.push_back(&o);
    return;
  }
  for (auto& c : o.children) collect_components(c, out);
}

Object* find_star(Object& o) {
  if (o.kind == NodeKind::kStar) return &o;
  for (auto& c : o.children) {
    if (Object* s = find_star(c)) return s;
  }
  return nullptr;
}

void require_radius(const GibbsModel& model) {
  if (!std::isfinite(static_cast<double>(model.rho()))) {
    throw InnerNotSubexponential("the inner series has no finite radius estimate");
  }
}

}  // namespace

long double ExactLaw::total() const {
  long double s = tail;
  for (const auto& [k, p] : mass) s += p;
  return s;
}

std::size_t SizeDistribution::draw(Rng& rng) const { return pick_index(rng, cumulative); }

SizeDistribution boltzmann_size_distribution(const TruncatedSeries& series, long double y) {
  if (!(y > 0)) throw PreconditionError("Boltzmann argument must be positive");
  Evaluation ev = evaluate(series, y);
  if (!(ev.value > 0)) throw ZeroMass("series vanishes at the Boltzmann argument");
  SizeDistribution d;
  d.normalizer = ev.value;
  d.p = float_terms(series, y);
  long double acc = 0;
  for (auto& v : d.p) {
    v /= ev.value;
    d.cumulative.push_back(acc += v);
  }
  d.defect = ev.tail / ev.value;
  return d;
}

CycleType sample_set_symmetry(const ArgumentFamily& args, Rng& rng) {
  CycleType out;
  long double prev = -1;
  for (std::size_t i = 1;; ++i) {
    if (i > kMaxCycleIndex) throw TailNotControlled("SET symmetry rates do not decay");
    const long double y = args(i);
    if (y < 0) throw PreconditionError("cycle index arguments must be non-negative");
    const long double rate = y / static_cast<long double>(i);
    if (const std::uint64_t m = poisson(rng, rate); m > 0) {
      out.add(static_cast<unsigned>(i), static_cast<unsigned>(m));
    }
    if (i >= 2) {
      if (rate == 0 && prev == 0) break;
      const long double q = prev > 0 ? rate / prev : 0;
      if (q < 1 && rate * q / (1 - q) < kSymmetryTail) break;
    }
    prev = rate;
  }
  return out;
}

SymmetrySampler::SymmetrySampler(const CycleIndexPoly& z, const ArgumentFamily& args) {
  long double acc = 0;
  std::vector<long double> y(z.truncation() + 1, 0.0L);
  for (std::size_t i = 1; i < y.size(); ++i) y[i] = args(i);
  for (const auto& [t, c] : z.terms()) {
    long double w = to_long_double(c);
    for (const auto& [i, m] : t.multiplicities()) w *= std::pow(y[i], static_cast<long double>(m));
    if (!(w > 0)) continue;
    types_.push_back(t);
    cumulative_.push_back(acc += w);
  }
  if (types_.empty()) throw ZeroMass("no cycle type has positive mass");
  std::vector<long double> v(y.begin() + 1, y.end());
  CycleIndexEvaluation ev = evaluate_at(z, v);
  defect_ = ev.value > 0 ? ev.residual / ev.value : 0;
}

CycleType SymmetrySampler::draw(Rng& rng) const { return types_[pick_index(rng, cumulative_)]; }

CycleType sample_general_symmetry(const CycleIndexPoly& z, const ArgumentFamily& args, Rng& rng) {
  return SymmetrySampler(z, args).draw(rng);
}

GibbsModel::GibbsModel(SpeciesSpec spec, ModelOptions options)
    : spec_(std::move(spec)), options_(options) {
  composite_ = spec_.root();
  ExprPtr top = resolve(spec_, composite_);
  if (top->op != Op::kCompose) {
    throw SpecError("the model root must be COMPOSE(F, G), got " + to_dsl(*top));
  }
  outer_ = top->args[0];
  inner_ = top->args[1];
  derived_ = build::compose(build::derive(outer_), inner_);
  ExprPtr f = resolve(spec_, outer_);
  if ((f->op == Op::kSet || f->op == Op::kSeq) && f->args[0]->op == Op::kAtom) outer_kind_ = f->op;

  const std::size_t n = options_.truncation;
  engine_ = std::make_unique<Engine>(spec_, n);
  inner_series_ = engine_->series(inner_, n);
  if (sgn(inner_series_[0]) != 0) {
    throw InnerHasConstantTerm("the inner species has objects of size 0");
  }
  TruncatedSeries outer_series = engine_->series(outer_, n);
  bool outer_ok = false;
  for (std::size_t k = 1; k <= n; ++k) outer_ok = outer_ok || sgn(outer_series[k]) != 0;
  if (!outer_ok) throw PreconditionError("the outer species has no objects of positive size");
  composite_series_ = engine_->series(composite_, n);
  if (composite_series_.is_zero() || composite_series_.last_nonzero() + composite_series_.span() <= n) {
    throw PreconditionError("the composite series vanishes near the truncation order");
  }
  derived_series_ = engine_->series(derived_, n);
  try {
    radius_ = radius_estimate(inner_series_);
  } catch (const InsufficientData&) {
    radius_.rho = std::numeric_limits<long double>::infinity();
    radius_.span = inner_series_.span();
  }
}

GibbsModel GibbsModel::compose(const SpeciesSpec& outer, const SpeciesSpec& inner,
                               ModelOptions options) {
  std::vector<std::pair<std::string, ExprPtr>> defs;
  for (const auto* s : {&inner, &outer}) {
    for (const auto& name : s->names()) {
      for (const auto& [existing, body] : defs) {
        if (existing == name) throw SpecError("definition '" + name + "' appears in both species");
      }
      defs.emplace_back(name, s->definition(name));
    }
  }
  return GibbsModel(SpeciesSpec::from_expr(build::compose(outer.root(), inner.root()), defs),
                    options);
}

const CycleIndexPoly& GibbsModel::outer_cycle_index() const {
  std::lock_guard lock(cache_mu_);
  if (!outer_index_) {
    const std::size_t n = options_.truncation;
    if (outer_kind_ != Op::kZero || n <= kSparseOuterTruncation) {
      outer_index_ = cycle_index_of(spec_, outer_, n);
    } else {
      outer_index_ = cycle_index_of(spec_, outer_, kSparseOuterTruncation);
      if (outer_index_->is_factored()) outer_index_ = cycle_index_of(spec_, outer_, n);
    }
  }
  return *outer_index_;
}

Evaluation GibbsModel::series_evaluation(const TruncatedSeries& s, long double x) const {
  if (std::isfinite(static_cast<double>(rho()))) return evaluate_with_radius(s, x, radius_);
  try {
    return evaluate(s, x, TailModel::kRadiusScaled);
  } catch (const InsufficientData&) {
    return evaluate(s, x, TailModel::kGeometric);
  }
}

long double GibbsModel::inner_value(std::size_t i, long double x) const {
  const long double xi = std::pow(x, static_cast<long double>(i));
  if (xi < kArgumentCut) return 0;
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = inner_values_.find({i, x}); it != inner_values_.end()) return it->second;
  }
  const long double v = engine_->value(inner_, xi, static_cast<unsigned>(i));
  std::lock_guard lock(cache_mu_);
  inner_values_.emplace(std::make_pair(i, x), v);
  return v;
}

ArgumentFamily GibbsModel::inner_arguments(long double x) const {
  return [this, x](std::size_t i) { return inner_value(i, x); };
}

std::vector<long double> GibbsModel::inner_argument_vector(long double x) const {
  std::vector<long double> out(options_.truncation, 0.0L);
  for (std::size_t i = 1; i <= out.size(); ++i) {
    out[i - 1] = inner_value(i, x);
    if (out[i - 1] == 0) break;
  }
  return out;
}

std::optional<SymmetryDraw> sample_composite(const GibbsModel& model, long double y, Rng& rng,
                                             std::size_t size_budget) {
  SymmetryDraw draw;
  BoltzmannOptions opts;
  opts.size_budget = size_budget;
  opts.on_component = [&](unsigned length, const Object& o) {
    draw.cycle_type.add(length);
    draw.attachments.emplace_back(length, o);
  };
  std::optional<Object> o = model.engine().boltzmann(model.composite(), y, rng, opts);
  if (!o) return std::nullopt;
  draw.object = std::move(*o);
  draw.size = draw.object.size();
  return draw;
}

std::string to_string(SamplingMethod m) {
  return m == SamplingMethod::kRejection ? "rejection" : "exact_recursive";
}

SamplingMethod parse_method(const std::string& text) {
  if (text == "rejection") return SamplingMethod::kRejection;
  if (text == "exact_recursive" || text == "exact") return SamplingMethod::kExactRecursive;
  throw PreconditionError("unknown sampling method '" + text + "'");
}

long double rejection_argument(const GibbsModel& model, std::size_t n) {
  long double rho = model.rho();
  if (!std::isfinite(static_cast<double>(rho))) rho = radius_estimate(model.composite_series()).rho;
  const long double shrink = 1.0L - 1.0L / static_cast<long double>(std::max<std::size_t>(n, 2));
  long double y = rho * std::pow(shrink, 1.0L / static_cast<long double>(model.span()));
  for (int attempt = 0; attempt < 200; ++attempt, y *= shrink) {
    try {
      model.engine().evaluation(model.composite(), y);
      return y;
    } catch (const TailNotControlled&) {
    }
  }
  throw TailNotControlled("no evaluable argument below the radius");
}

Object sample_S_n(const GibbsModel& model, std::size_t n, Rng& rng, SamplingMethod method) {
  Engine& engine = model.engine();
  if (sgn(engine.coefficient(model.composite(), n)) == 0) {
    throw EmptySize("no composite objects of size " + std::to_string(n));
  }
  if (method == SamplingMethod::kExactRecursive) {
    try {
      return engine.unrank(model.composite(), n, uniform_unit(rng, kUnrankBits));
    } catch (const Unsupported&) {
      // Falls back to rejection below.
    }
  }
  const long double y = rejection_argument(model, n);
  for (std::size_t attempt = 0; attempt < model.options().rejection_budget; ++attempt) {
    std::optional<SymmetryDraw> d = sample_composite(model, y, rng, n);
    if (d && d->size == n) return std::move(d->object);
  }
  throw RejectionBudgetExceeded("no draw of size " + std::to_string(n) + " after " +
                                std::to_string(model.options().rejection_budget) + " attempts");
}

std::vector<const Object*> components_of(const Object& s) {
  std::vector<Object*> carriers;
  collect_components(const_cast<Object&>(s), carriers);
  std::vector<const Object*> out;
  out.reserve(carriers.size());
  for (Object* c : carriers) out.push_back(&c->children.at(0));
  return out;
}

FragmentRecord extract_remainder(const Object& s, Rng& rng) {
  Object copy = s;
  std::vector<Object*> carriers;
  collect_components(copy, carriers);
  if (carriers.empty()) throw PreconditionError("the composite object has no components");
  std::size_t largest = 0;
  std::vector<std::size_t> maximal;
  for (std::size_t i = 0; i < carriers.size(); ++i) {
    const std::size_t sz = carriers[i]->size();
    if (sz > largest) {
      largest = sz;
      maximal.clear();
    }
    if (sz == largest) maximal.push_back(i);
  }
  const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(maximal.size()));
  *carriers[maximal[std::min(pick, maximal.size() - 1)]] = Object::star();
  FragmentRecord r;
  r.component_count = carriers.size();
  r.largest_size = largest;
  r.remainder = canonicalize(std::move(copy));
  r.remainder_size = r.remainder.size();
  return r;
}

ExactLaw LimitLaw::law() const {
  ExactLaw out;
  for (const auto& e : entries) out.mass[e.remainder.key()] += e.p;
  out.tail = tail;
  return out;
}

long double LimitLaw::enumerated_mass() const {
  long double s = 0;
  for (const auto& e : entries) s += e.p;
  return s;
}

LimitLaw limit_remainder_distribution(const GibbsModel& model, std::size_t cap) {
  require_radius(model);
  Engine& engine = model.engine();
  LimitLaw law;
  law.rho = model.rho();
  law.spread = model.radius().spread;
  law.cap = cap;
  law.normalizer = model.series_evaluation(model.derived_series(), law.rho).value;
  if (!(law.normalizer > 0)) throw ZeroMass("the remainder series vanishes at rho");
  auto normalizer_at = [&](long double x) -> long double {
    try {
      return model.series_evaluation(model.derived_series(), x).value;
    } catch (const TailNotControlled&) {
      return std::numeric_limits<long double>::quiet_NaN();
    }
  };
  const long double lo_x = law.rho - law.spread, hi_x = law.rho + law.spread;
  const long double lo_norm = normalizer_at(lo_x), hi_norm = normalizer_at(hi_x);

  long double partial = 0;
  for (std::size_t k = 0; k <= cap; ++k) {
    const Rational ck = engine.coefficient(model.derived(), k);
    if (sgn(ck) == 0) continue;
    partial += to_long_double(ck) * std::pow(law.rho, static_cast<long double>(k));
    const auto kk = static_cast<long double>(k);
    const std::size_t guard = std::max(cap, kDefaultEnumerationGuard);
    for (auto& [obj, w] : engine.enumerate(model.derived(), k, guard)) {
      LimitEntry e;
      const long double wf = to_long_double(w);
      e.p = wf * std::pow(law.rho, kk) / law.normalizer;
      e.p_low = wf * std::pow(lo_x, kk) / lo_norm;
      e.p_high = wf * std::pow(hi_x, kk) / hi_norm;
      e.components = components_of(obj.tree()).size();
      e.remainder = std::move(obj);
      law.entries.push_back(std::move(e));
    }
  }
  law.tail = std::max(0.0L, (law.normalizer - partial) / law.normalizer);
  return law;
}

ExactLaw limit_component_law(const GibbsModel& model) {
  require_radius(model);
  const CycleIndexPoly derived = derivative_z1(model.outer_cycle_index());
  CycleIndexEvaluation ev = evaluate_at(derived, model.inner_argument_vector(model.rho()));
  const long double norm = model.series_evaluation(model.derived_series(), model.rho()).value;
  // The slices come from the cycle index and the normalizer from the series,
  // so the total checks one against the other.
  ExactLaw out;
  for (std::size_t k = 0; k < ev.slices.size(); ++k) {
    if (ev.slices[k] > 0) out.mass[std::to_string(k + 1)] = ev.slices[k] / norm;
  }
  out.tail = std::max(0.0L, ev.residual) / norm;
  return out;
}

ExactLaw exact_remainder_law(const GibbsModel& model, std::size_t n, std::size_t guard) {
  auto objects = model.engine().enumerate(model.composite(), n, guard);
  Rational total = 0;
  for (const auto& [o, w] : objects) total += w;
  if (sgn(total) == 0) throw EmptySize("no composite objects of size " + std::to_string(n));
  std::map<std::string, Rational> mass;
  for (const auto& [o, w] : objects) {
    Object base = o.tree();
    std::vector<Object*> carriers;
    collect_components(base, carriers);
    if (carriers.empty()) continue;
    std::size_t largest = 0;
    for (Object* c : carriers) largest = std::max(largest, c->size());
    std::vector<std::size_t> maximal;
    for (std::size_t i = 0; i < carriers.size(); ++i) {
      if (carriers[i]->size() == largest) maximal.push_back(i);
    }
    const Rational share = w / total / static_cast<unsigned long>(maximal.size());
    for (std::size_t i : maximal) {
      Object copy = o.tree();
      std::vector<Object*> cs;
      collect_components(copy, cs);
      *cs[i] = Object::star();
      mass[canonicalize_in_place(copy)] += share;
    }
  }
  ExactLaw out;
  for (const auto& [k, p] : mass) out.mass[k] = to_long_double(p);
  return out;
}

ExactLaw exact_composite_law(const GibbsModel& model, std::size_t n, std::size_t guard) {
  auto objects = model.engine().enumerate(model.composite(), n, guard);
  Rational total = 0;
  for (const auto& [o, w] : objects) total += w;
  if (sgn(total) == 0) throw EmptySize("no composite objects of size " + std::to_string(n));
  ExactLaw out;
  for (const auto& [o, w] : objects) out.mass[o.key()] += to_long_double(w / total);
  return out;
}

ExactLaw exact_hat_S_n_law(const GibbsModel& model, std::size_t n, std::size_t guard) {
  if (n == 0) throw PreconditionError("hat-S_n needs n >= 1");
  const LimitLaw limit = limit_remainder_distribution(model, n - 1);
  Engine& engine = model.engine();
  std::map<std::size_t, std::vector<std::pair<UnlabelledObject, Rational>>> inner;
  std::map<std::size_t, Rational> inner_total;
  ExactLaw out;
  out.tail = limit.tail;
  for (const LimitEntry& e : limit.entries) {
    const std::size_t missing = n - e.remainder.size();
    if (!inner.count(missing)) {
      inner[missing] = engine.enumerate(model.inner(), missing, guard);
      Rational t = 0;
      for (const auto& [g, w] : inner[missing]) t += w;
      inner_total[missing] = t;
    }
    const Rational& total = inner_total[missing];
    if (sgn(total) == 0) {
      out.tail += e.p;
      continue;
    }
    for (const auto& [g, w] : inner[missing]) {
      Object built = e.remainder.tree();
      Object* star = find_star(built);
      if (!star) throw PreconditionError("remainder without a *-atom");
      *star = Object::carrier(1, g.tree());
      out.mass[canonicalize_in_place(built)] += e.p * to_long_double(w / total);
    }
  }
  return out;
}

std::optional<Object> sample_hat_S_n(const GibbsModel& model, std::size_t n, Rng& rng) {
  require_radius(model);
  Engine& engine = model.engine();
  BoltzmannOptions opts;
  opts.size_budget = n == 0 ? 0 : n - 1;
  std::optional<Object> r = engine.boltzmann(model.derived(), model.rho(), rng, opts);
  if (!r) return std::nullopt;
  const std::size_t missing = n - r->size();
  if (sgn(engine.coefficient(model.inner(), missing)) == 0) return std::nullopt;
  Object g = engine.unrank(model.inner(), missing, uniform_unit(rng, kUnrankBits));
  Object* star = find_star(*r);
  if (!star) throw PreconditionError("remainder without a *-atom");
  *star = Object::carrier(1, std::move(g));
  return r;
}

PgfReport cycle_statistics_pgf_check(const GibbsModel& model, long double y, long double w,
                                     std::size_t samples, Rng& rng) {
  require_radius(model);
  if (samples == 0) throw PreconditionError("need at least one sample");
  const long double rho = model.rho();
  const CycleIndexPoly& zf = model.outer_cycle_index();
  const std::vector<long double> args = model.inner_argument_vector(rho);
  std::vector<long double> shifted(args.size(), 0.0L);
  for (std::size_t i = 1; i <= args.size(); ++i) {
    shifted[i - 1] = i == 1 ? y * args[0] : model.inner_value(i, w * rho);
  }
  PgfReport rep;
  rep.y = y;
  rep.w = w;
  rep.samples = samples;
  rep.exact = evaluate_at(zf, shifted).value / evaluate_at(zf, args).value;

  const ArgumentFamily family = model.inner_arguments(rho);
  std::optional<SymmetrySampler> general;
  if (!model.outer_is_set()) {
    const std::size_t cut = std::min(zf.truncation(), kSparseOuterTruncation);
    general.emplace(zf.truncated(cut), family);
  }
  std::map<unsigned, SizeDistribution> sizes;
  auto size_law = [&](unsigned i) -> const SizeDistribution& {
    auto it = sizes.find(i);
    if (it == sizes.end()) {
      TruncatedSeries gi = model.engine().series(model.inner(), model.truncation(), i);
      const long double x = std::pow(rho, static_cast<long double>(i));
      it = sizes.emplace(i, boltzmann_size_distribution(gi, x)).first;
    }
    return it->second;
  };

  long double sum = 0, sum_sq = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    CycleType t = general ? general->draw(rng) : sample_set_symmetry(family, rng);
    long double h = 0;
    for (const auto& [i, m] : t.multiplicities()) {
      if (i < 2) continue;
      const SizeDistribution& law = size_law(i);
      for (unsigned c = 0; c < m; ++c) h += static_cast<long double>(i * law.draw(rng));
    }
    const long double v = std::pow(y, static_cast<long double>(t[1])) * std::pow(w, h);
    sum += v;
    sum_sq += v * v;
  }
  const auto m = static_cast<long double>(samples);
  rep.estimate = sum / m;
  const long double var = std::max(0.0L, sum_sq / m - rep.estimate * rep.estimate);
  rep.standard_error = std::sqrt(var / m);
  return rep;
}

}  // namespace gibbs
