#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "engine_impl.hpp"

namespace gibbs {

Engine::Engine(SpeciesSpec spec, std::size_t eval_truncation)
    : impl_(std::make_unique<Impl>(std::move(spec), eval_truncation)) {}

Engine::~Engine() = default;

const SpeciesSpec& Engine::spec() const { return impl_->spec; }

std::size_t Engine::eval_truncation() const { return impl_->eval_truncation; }

Rational Engine::coefficient(const ExprPtr& e, std::size_t n, unsigned power) {
  std::lock_guard lock(impl_->mu);
  return impl_->coeff(impl_->root_node(e, power), n);
}

TruncatedSeries Engine::series(const ExprPtr& e, std::size_t truncation, unsigned power) {
  std::lock_guard lock(impl_->mu);
  Node* nd = impl_->root_node(e, power);
  std::vector<Rational> cs;
  cs.reserve(truncation + 1);
  for (std::size_t n = 0; n <= truncation; ++n) cs.push_back(impl_->coeff(nd, n));
  return TruncatedSeries(std::move(cs));
}

std::vector<std::pair<UnlabelledObject, Rational>> Engine::enumerate(const ExprPtr& e,
                                                                     std::size_t n,
                                                                     std::size_t guard) {
  if (n > guard) {
    throw SizeGuardExceeded("enumeration at size " + std::to_string(n) + " exceeds the guard " +
                            std::to_string(guard));
  }
  std::lock_guard lock(impl_->mu);
  const Listing& raw = impl_->listing(impl_->root_node(e, 1), n);
  std::vector<std::pair<UnlabelledObject, Rational>> out;
  out.reserve(raw.size());
  for (const auto& [o, w] : raw) out.emplace_back(canonicalize(o), w);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].first == out[i - 1].first) {
      throw std::logic_error("enumeration produced the orbit " + out[i].first.key() + " twice");
    }
  }
  return out;
}

Object Engine::unrank(const ExprPtr& e, std::size_t n, const Rational& u) {
  if (u < 0 || u >= 1) throw PreconditionError("unranking position must lie in [0, 1)");
  std::lock_guard lock(impl_->mu);
  Node* nd = impl_->root_node(e, 1);
  const Rational total = impl_->coeff(nd, n);
  if (sgn(total) == 0) throw EmptySize("no objects of size " + std::to_string(n));
  return impl_->unrank(nd, n, u * total).obj;
}

Evaluation Engine::evaluation(const ExprPtr& e, long double x, unsigned power) {
  std::lock_guard lock(impl_->mu);
  return impl_->evaluation(impl_->root_node(e, power), x);
}

long double Engine::value(const ExprPtr& e, long double x, unsigned power) {
  return evaluation(e, x, power).value;
}

std::optional<Object> Engine::boltzmann(const ExprPtr& e, long double x, Rng& rng,
                                        const BoltzmannOptions& options) {
  std::lock_guard lock(impl_->mu);
  ExprPtr core = impl_->lower(e);
  Node* nd = impl_->node(core.get(), nullptr, 1);
  DrawState st;
  st.rng = &rng;
  st.budget = options.size_budget;
  st.hook = &options.on_component;
  // Components are the atoms of the outermost composition.
  const Expr* top = core.get();
  while (top->op == Op::kRef) top = impl_->body(top->name).get();
  if (top->op == Op::kCompose) st.hook_ctx = impl_->push(top->args[1], nullptr);
  try {
    return impl_->draw(nd, x, 1, st);
  } catch (const BudgetHit&) {
    return std::nullopt;
  }
}

TruncatedSeries ogf(const SpeciesSpec& spec, unsigned power, std::size_t N) {
  Engine engine(spec);
  return engine.series(spec.root(), N, power);
}

std::vector<std::pair<UnlabelledObject, Rational>> enumerate(const SpeciesSpec& spec,
                                                             std::size_t n, std::size_t guard) {
  Engine engine(spec);
  return engine.enumerate(spec.root(), n, guard);
}

UnlabelledObject unrank_by_weight(const SpeciesSpec& spec, std::size_t n, const Rational& u) {
  Engine engine(spec);
  return canonicalize(engine.unrank(spec.root(), n, u));
}

namespace {

class CycleIndexBuilder {
 public:
  explicit CycleIndexBuilder(const SpeciesSpec& spec) : spec_(spec) {}

  CycleIndexPoly build(const ExprPtr& e, unsigned p, std::size_t n) {
    if (p != 1 && invariant(e)) p = 1;
    switch (e->op) {
      case Op::kAtom:
        return CycleIndexPoly::atom(n);
      case Op::kEpsilon:
        return CycleIndexPoly::one(n);
      case Op::kSet:
      case Op::kSeq: {
        CycleIndexPoly outer = e->op == Op::kSet ? z_set(n) : z_seq(n);
        const ExprPtr& s = e->args[0];
        if (s->op == Op::kAtom) return outer;
        return plethysm(outer, [&](std::size_t i) {
          return build(s, p * static_cast<unsigned>(i), n / i);
        });
      }
      case Op::kUnion:
        return add(build(e->args[0], p, n), build(e->args[1], p, n));
      case Op::kProduct:
        return mul(build(e->args[0], p, n), build(e->args[1], p, n));
      case Op::kCompose: {
        const ExprPtr& g = e->args[1];
        CycleIndexPoly zf = build(e->args[0], p, n);
        if (g->op == Op::kAtom) return zf;
        return plethysm(zf, [&](std::size_t i) {
          return build(g, p * static_cast<unsigned>(i), n / i);
        });
      }
      case Op::kDerive:
        return derivative_z1(build(e->args[0], p, n + 1)).truncated(n);
      case Op::kWeighted: {
        const WeightModel& w = e->weight;
        switch (w.kind) {
          case WeightModel::Kind::kUnit:
            return build(e->args[0], p, n);
          case WeightModel::Kind::kAtomMultiplicative:
            return scale_atoms(build(e->args[0], p, n), pow(w.factor, p));
          case WeightModel::Kind::kTable: {
            CycleIndexPoly z(n);
            for (const auto& entry : w.table) {
              if (entry.object.size() > n) continue;
              z = add(z, scale(automorphism_cycle_index(entry.object, n), pow(entry.weight, p)));
            }
            return z;
          }
        }
        break;
      }
      case Op::kRef:
        return reference(e->name, p, n);
      default:
        break;
    }
    throw SpecError("no cycle index for " + to_dsl(*e));
  }

 private:
  using Key = std::pair<std::string, unsigned>;
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Weight powers do not matter when every weight is 0 or 1.
  bool invariant(const ExprPtr& e) {
    switch (e->op) {
      case Op::kRef: {
        auto [it, fresh] = invariant_names_.try_emplace(e->name, true);
        if (fresh) it->second = invariant(spec_.definition(e->name));
        return it->second;
      }
      case Op::kWeighted:
        if (e->weight.kind == WeightModel::Kind::kAtomMultiplicative && e->weight.factor != 1) {
          return false;
        }
        for (const auto& entry : e->weight.table) {
          if (entry.weight != 0 && entry.weight != 1) return false;
        }
        break;
      default:
        break;
    }
    for (const auto& a : e->args) {
      if (!invariant(a)) return false;
    }
    return true;
  }

  // Fixpoint iteration per (name, power, truncation). A result is final once
  // it no longer reads an enclosing unfinished iterate.
  CycleIndexPoly reference(const std::string& name, unsigned p, std::size_t n) {
    const Key key{name, p};
    auto& done = final_[key];
    if (auto it = done.lower_bound(n); it != done.end()) return it->second.truncated(n);
    const auto active = std::make_pair(key, n);
    if (auto it = depth_.find(active); it != depth_.end()) {
      low_ = std::min(low_, it->second);
      return current_.at(active);
    }
    const std::size_t depth = depth_.size();
    depth_.emplace(active, depth);
    current_[active] = CycleIndexPoly(n);
    const std::size_t saved_low = low_;
    low_ = kNone;
    const ExprPtr body = spec_.definition(name);
    for (std::size_t iter = 0;; ++iter) {
      if (iter > n + 2) throw IllFoundedRecursion("cycle index of '" + name + "' does not stabilize");
      CycleIndexPoly next = build(body, p, n);
      const bool stable = next == current_.at(active);
      current_.at(active) = std::move(next);
      if (stable) break;
    }
    CycleIndexPoly out = std::move(current_.at(active));
    current_.erase(active);
    depth_.erase(active);
    const std::size_t my_low = low_;
    if (my_low >= depth) final_[key].emplace(n, out);
    low_ = std::min(saved_low, my_low >= depth ? kNone : my_low);
    return out;
  }

  const SpeciesSpec& spec_;
  std::map<std::string, bool> invariant_names_;
  std::map<Key, std::map<std::size_t, CycleIndexPoly>> final_;
  std::map<std::pair<Key, std::size_t>, CycleIndexPoly> current_;
  std::map<std::pair<Key, std::size_t>, std::size_t> depth_;
  std::size_t low_ = kNone;
};

}  // namespace

CycleIndexPoly cycle_index_of(const SpeciesSpec& spec, const ExprPtr& e, std::size_t N,
                              unsigned power) {
  CycleIndexBuilder builder(spec);
  return builder.build(e, power, N);
}

}  // namespace gibbs
