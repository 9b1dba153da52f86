#include "engine_impl.hpp"

namespace gibbs {

namespace {

// w^p, with p = 0 counting objects of nonzero weight.
Rational weight_power(const Rational& w, unsigned p) {
  if (p == 0) return w > 0 ? Rational(1) : Rational(0);
  return pow(w, p);
}

struct BusyGuard {
  explicit BusyGuard(Node* n) : nd(n) { nd->busy = true; }
  ~BusyGuard() { nd->busy = false; }
  Node* nd;
};

}  // namespace

const Ctx* Engine::Impl::push(const ExprPtr& frame, const Ctx* parent) {
  const auto key = std::make_pair(frame.get(), parent);
  auto it = contexts.find(key);
  if (it != contexts.end()) return it->second.get();
  auto c = std::make_unique<Ctx>();
  c->frame = frame;
  c->parent = parent;
  c->transparent = frame->op == Op::kScale;
  c->level = (parent ? parent->level : 0) + (c->transparent ? 0 : 1);
  c->depth = (parent ? parent->depth : 0) + 1;
  if (c->depth > kMaxContextDepth) {
    throw IllFoundedRecursion("compositions nest deeper than " + std::to_string(kMaxContextDepth) +
                              " levels");
  }
  c->invariant = invariant(frame.get()) && (!parent || parent->invariant);
  return contexts.emplace(key, std::move(c)).first->second.get();
}

Node* Engine::Impl::node(const Expr* e, const Ctx* ctx, unsigned p) {
  if (p != 1 && invariant(e) && (!ctx || ctx->invariant)) p = 1;
  NodeKey key{e, ctx, p};
  auto it = nodes.find(key);
  if (it != nodes.end()) return it->second.get();
  auto nd = std::make_unique<Node>();
  nd->e = e;
  nd->ctx = ctx;
  nd->p = p;
  return nodes.emplace(key, std::move(nd)).first->second.get();
}

Node* Engine::Impl::kid(Node* nd, std::size_t i) {
  if (nd->kids.size() <= i) nd->kids.resize(i + 1, nullptr);
  if (nd->kids[i]) return nd->kids[i];
  const Expr* e = nd->e;
  Node* out = nullptr;
  switch (e->op) {
    case Op::kAtom:
      out = node(nd->ctx->frame.get(), nd->ctx->parent, nd->p);
      break;
    case Op::kEscape:
      if (!nd->ctx) throw SpecError("escape outside a composition");
      out = node(e->args[0].get(), nd->ctx->parent, nd->p);
      break;
    case Op::kRef:
      out = node(body(e->name).get(), nd->ctx, nd->p);
      break;
    case Op::kCompose:
      out = node(e->args[0].get(), push(e->args[1], nd->ctx), nd->p);
      break;
    default:
      out = node(e->args.at(i).get(), nd->ctx, nd->p);
  }
  nd->kids[i] = out;
  return out;
}

Node* Engine::Impl::powered(Node* nd, unsigned k) {
  if (nd->powered.size() <= k) nd->powered.resize(k + 1, nullptr);
  if (!nd->powered[k]) nd->powered[k] = node(nd->e->args[0].get(), nd->ctx, nd->p * k);
  return nd->powered[k];
}

Node* Engine::Impl::root_node(const ExprPtr& source, unsigned p) {
  return node(lower(source).get(), nullptr, p);
}

const Rational& Engine::Impl::coeff(Node* nd, std::size_t n) {
  if (n < nd->c.size()) return nd->c[n];
  if (nd->busy) {
    throw IllFoundedRecursion("definition depends on its own coefficient of order " +
                              std::to_string(nd->c.size()) + " (" + to_dsl(*nd->e) + ")");
  }
  BusyGuard guard(nd);
  while (nd->c.size() <= n) {
    Rational v = compute(nd, nd->c.size());
    nd->c.push_back(std::move(v));
  }
  return nd->c[n];
}

Rational Engine::Impl::product_coeff(Node* a, Node* b, std::size_t n) {
  Rational sum = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t j = n - i;
    // Ask for the smaller index first: a recursion through the other factor
    // is only reached when this one is nonzero.
    // Copies: a recursive call may grow either coefficient vector.
    if (i <= j) {
      const Rational x = coeff(a, i);
      if (sgn(x) == 0) continue;
      const Rational& y = coeff(b, j);
      if (sgn(y) == 0) continue;
      sum += x * y;
    } else {
      const Rational y = coeff(b, j);
      if (sgn(y) == 0) continue;
      const Rational& x = coeff(a, i);
      if (sgn(x) == 0) continue;
      sum += x * y;
    }
  }
  return sum;
}

Rational Engine::Impl::compute(Node* nd, std::size_t n) {
  const Expr* e = nd->e;
  switch (e->op) {
    case Op::kAtom:
      if (!nd->ctx) return n == 1 ? 1 : 0;
      return coeff(kid(nd, 0), n);
    case Op::kEpsilon:
    case Op::kStar:
      return n == 0 ? 1 : 0;
    case Op::kZero:
      return 0;
    case Op::kScale:
      return weight_power(e->factor, nd->p) * coeff(kid(nd, 0), n);
    case Op::kEscape:
    case Op::kRef:
      return coeff(kid(nd, 0), n);
    case Op::kCompose:
      if (n == 0) {
        Node* inner = node(e->args[1].get(), nd->ctx, nd->p);
        if (sgn(coeff(inner, 0)) != 0) {
          throw InnerHasConstantTerm("inner species of " + to_dsl(*e) + " has objects of size 0");
        }
      }
      return coeff(kid(nd, 0), n);
    case Op::kUnion:
    case Op::kMarkedSum:
      return coeff(kid(nd, 0), n) + coeff(kid(nd, 1), n);
    case Op::kProduct:
    case Op::kMarkedSet:
    case Op::kMarkedSeq:
      return product_coeff(kid(nd, 0), kid(nd, 1), n);
    case Op::kSeq: {
      Node* s = kid(nd, 0);
      if (n == 0) {
        if (sgn(coeff(s, 0)) != 0) {
          throw InnerHasConstantTerm("SEQ of a species with objects of size 0");
        }
        return 1;
      }
      Rational sum = 0;
      for (std::size_t m = 1; m <= n; ++m) {
        const Rational sm = coeff(s, m);
        if (sgn(sm) == 0) continue;
        sum += sm * coeff(nd, n - m);
      }
      return sum;
    }
    case Op::kSet: {
      if (n == 0) {
        if (sgn(coeff(powered(nd, 1), 0)) != 0) {
          throw InnerHasConstantTerm("SET of a species with objects of size 0");
        }
        nd->ell.assign(1, Rational(0));
        return 1;
      }
      // n a_n = sum_{m=1}^{n} ell_m a_{n-m}
      Rational l = 0;
      for (std::size_t k = 1; k <= n; ++k) {
        if (n % k != 0) continue;
        const Rational& s = coeff(powered(nd, static_cast<unsigned>(k)), n / k);
        if (sgn(s) != 0) l += Rational(static_cast<unsigned long>(n / k)) * s;
      }
      nd->ell.push_back(std::move(l));
      Rational sum = 0;
      for (std::size_t m = 1; m <= n; ++m) {
        if (sgn(nd->ell[m]) == 0) continue;
        sum += nd->ell[m] * nd->c[n - m];
      }
      sum /= static_cast<unsigned long>(n);
      return sum;
    }
    case Op::kTable: {
      if (nd->ctx) return table_in_context(nd, n);
      Rational sum = 0;
      for (const auto& entry : e->table) {
        if (entry.object.size() == n) sum += weight_power(entry.weight, nd->p);
      }
      return sum;
    }
    default:
      throw SpecError("cannot count " + to_dsl(*e));
  }
}

Rational Engine::Impl::table_in_context(Node* nd, std::size_t n) {
  if (!nd->table_terms) {
    std::vector<TableTerm> terms;
    nd->table_constant = 0;
    for (const auto& entry : nd->e->table) {
      Rational wp = weight_power(entry.weight, nd->p);
      if (sgn(wp) == 0) continue;
      const std::size_t s = entry.object.size();
      if (s == 0) {
        nd->table_constant += wp;
        continue;
      }
      CycleIndexPoly z = automorphism_cycle_index(entry.object, s);
      for (const auto& [type, c] : z.terms()) {
        if (type.degree() != s) continue;
        TableTerm t;
        t.coeff = c * wp;
        for (const auto& [i, m] : type.multiplicities()) {
          for (unsigned r = 0; r < m; ++r) t.cycles.push_back(i);
        }
        t.partial.resize(t.cycles.size());
        terms.push_back(std::move(t));
      }
    }
    nd->table_terms = std::move(terms);
  }
  Rational total = n == 0 ? nd->table_constant : Rational(0);
  for (auto& t : *nd->table_terms) {
    for (std::size_t l = 0; l < t.cycles.size(); ++l) {
      auto& seq = t.partial[l];
      while (seq.size() <= n) {
        const std::size_t m = seq.size();
        const unsigned i = t.cycles[l];
        Node* a = node(atom_.get(), nd->ctx, nd->p * i);
        auto b = [&](std::size_t k) -> Rational {
          if (k == 0 || k % i != 0) return 0;
          return coeff(a, k / i);
        };
        Rational v = 0;
        if (l == 0) {
          v = b(m);
        } else {
          const auto& prev = t.partial[l - 1];
          for (std::size_t k = 0; k <= m; ++k) {
            if (sgn(prev[k]) == 0) continue;
            Rational bk = b(m - k);
            if (sgn(bk) != 0) v += prev[k] * bk;
          }
        }
        seq.push_back(std::move(v));
      }
    }
    total += t.coeff * t.partial.back()[n];
  }
  return total;
}

}  // namespace gibbs
