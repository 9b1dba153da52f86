#include <algorithm>
#include <cmath>

#include "engine_impl.hpp"

namespace gibbs {

namespace {

inline constexpr long double kRateFloor = 1e-16L;
inline constexpr long double kRelativeRateFloor = 1e-13L;
inline constexpr unsigned kMaxCycleLength = 100000;

std::uint64_t poisson(Rng& rng, long double lambda) {
  if (lambda <= 0) return 0;
  if (lambda < 30) {
    long double p = std::exp(-lambda);
    long double cdf = p;
    const long double u = uniform01(rng);
    std::uint64_t k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= lambda / static_cast<long double>(k);
      cdf += p;
    }
    return k;
  }
  std::poisson_distribution<std::uint64_t> dist(static_cast<double>(lambda));
  return dist(rng);
}

std::size_t categorical(Rng& rng, const std::vector<long double>& cumulative) {
  const long double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

}  // namespace

const Evaluation& Engine::Impl::evaluation(Node* nd, long double x) {
  auto it = nd->evaluations.find(x);
  if (it != nd->evaluations.end()) return it->second;
  if (!nd->eval_series) {
    std::vector<Rational> cs;
    cs.reserve(eval_truncation + 1);
    for (std::size_t n = 0; n <= eval_truncation; ++n) cs.push_back(coeff(nd, n));
    nd->eval_series = TruncatedSeries(std::move(cs));
  }
  Evaluation ev;
  try {
    ev = evaluate(*nd->eval_series, x, TailModel::kRadiusScaled);
  } catch (const InsufficientData&) {
    ev = evaluate(*nd->eval_series, x, TailModel::kGeometric);
  }
  return nd->evaluations.emplace(x, ev).first->second;
}

const SetPlan& Engine::Impl::set_plan(Node* nd, long double x) {
  auto it = nd->set_plans.find(x);
  if (it != nd->set_plans.end()) return it->second;
  SetPlan plan;
  long double prev = 0;
  for (unsigned k = 1;; ++k) {
    if (k > kMaxCycleLength) throw TailNotControlled("SET rates do not decay at this argument");
    const long double xk = std::pow(x, static_cast<long double>(k));
    if (xk == 0) break;
    const long double rate = evaluation(powered(nd, k), xk).value / k;
    plan.total += rate;
    plan.cumulative.push_back(plan.total);
    if (k >= 2 && rate <= prev &&
        (rate < kRateFloor || rate < kRelativeRateFloor * plan.total)) {
      break;
    }
    prev = rate;
  }
  return nd->set_plans.emplace(x, std::move(plan)).first->second;
}

Object Engine::Impl::draw(Node* nd, long double x, unsigned mult, DrawState& st) {
  const Expr* e = nd->e;
  Rng& rng = *st.rng;
  switch (e->op) {
    case Op::kAtom: {
      if (!nd->ctx) {
        st.size += mult;
        if (st.size > st.budget) throw BudgetHit{};
        return Object::atom();
      }
      Object o = draw(kid(nd, 0), x, mult, st);
      if (nd->ctx == st.hook_ctx && st.hook && *st.hook) (*st.hook)(mult, o);
      if (nd->ctx->transparent) return o;
      return Object::carrier(nd->ctx->level, std::move(o));
    }
    case Op::kEpsilon:
      return Object::epsilon();
    case Op::kStar:
      return Object::star();
    case Op::kZero:
      throw ZeroMass("Boltzmann draw from an empty species");
    case Op::kScale:
    case Op::kEscape:
    case Op::kRef:
    case Op::kCompose:
      return draw(kid(nd, 0), x, mult, st);
    case Op::kUnion:
    case Op::kMarkedSum: {
      auto it = nd->branch_prob.find(x);
      if (it == nd->branch_prob.end()) {
        const long double a = evaluation(kid(nd, 0), x).value;
        const long double b = evaluation(kid(nd, 1), x).value;
        if (a + b <= 0) throw ZeroMass("Boltzmann draw from a union of zero mass");
        it = nd->branch_prob.emplace(x, a / (a + b)).first;
      }
      const int branch = uniform01(rng) < it->second ? 0 : 1;
      Object o = draw(kid(nd, branch), x, mult, st);
      if (e->op == Op::kMarkedSum) return o;
      return Object{NodeKind::kUnion, branch, {std::move(o)}};
    }
    case Op::kProduct: {
      Object a = draw(kid(nd, 0), x, mult, st);
      Object b = draw(kid(nd, 1), x, mult, st);
      return Object{NodeKind::kProduct, 0, {std::move(a), std::move(b)}};
    }
    case Op::kMarkedSet: {
      Object set = draw(kid(nd, 0), x, mult, st);
      set.children.push_back(draw(kid(nd, 1), x, mult, st));
      return set;
    }
    case Op::kMarkedSeq: {
      Object seq = draw(kid(nd, 0), x, mult, st);
      Object rest = draw(kid(nd, 1), x, mult, st);
      seq.children.push_back(std::move(rest.children.at(0)));
      for (auto& c : rest.children.at(1).children) seq.children.push_back(std::move(c));
      return seq;
    }
    case Op::kSeq: {
      const long double v = evaluation(kid(nd, 0), x).value;
      if (v >= 1) throw TailNotControlled("SEQ diverges at this argument");
      Object seq{NodeKind::kSeq, 0, {}};
      if (v <= 0) return seq;
      const long double u = 1.0L - uniform01(rng);  // (0, 1]
      const auto k = static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(v)));
      for (std::uint64_t i = 0; i < k; ++i) seq.children.push_back(draw(kid(nd, 0), x, mult, st));
      return seq;
    }
    case Op::kSet: {
      const SetPlan& plan = set_plan(nd, x);
      Object set{NodeKind::kSet, 0, {}};
      if (plan.cumulative.empty()) return set;
      const std::uint64_t count = poisson(rng, plan.total);
      for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned k = static_cast<unsigned>(categorical(rng, plan.cumulative)) + 1;
        const long double xk = std::pow(x, static_cast<long double>(k));
        Object o = draw(powered(nd, k), xk, mult * k, st);
        for (unsigned c = 1; c < k; ++c) set.children.push_back(o);
        set.children.push_back(std::move(o));
      }
      return set;
    }
    case Op::kTable: {
      if (nd->ctx) throw Unsupported("Boltzmann sampling of a TABLE-weighted species inside a composition");
      auto it = nd->table_plans.find(x);
      if (it == nd->table_plans.end()) {
        std::vector<long double> cum;
        long double acc = 0;
        for (const auto& entry : e->table) {
          acc += to_long_double(pow(entry.weight, nd->p)) *
                 std::pow(x, static_cast<long double>(entry.object.size()));
          cum.push_back(acc);
        }
        if (acc <= 0) throw ZeroMass("TABLE has zero mass at this argument");
        it = nd->table_plans.emplace(x, std::move(cum)).first;
      }
      const TableEntry& entry = e->table[categorical(rng, it->second)];
      st.size += mult * entry.object.size();
      if (st.size > st.budget) throw BudgetHit{};
      return entry.object;
    }
    default:
      throw SpecError("cannot sample " + to_dsl(*e));
  }
}

}  // namespace gibbs
