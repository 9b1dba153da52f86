#include <map>

#include "engine_impl.hpp"

namespace gibbs {

namespace {

Object make(NodeKind kind, std::vector<Object> children, int tag = 0) {
  return Object{kind, tag, std::move(children)};
}

// Substitutes objects for the atoms of `o`, in depth-first order.
Object substitute(const Object& o, const std::vector<const Object*>& parts, std::size_t& next,
                  int level, bool transparent) {
  if (o.kind == NodeKind::kAtom) {
    const Object& inner = *parts[next++];
    return transparent ? inner : Object::carrier(level, inner);
  }
  Object out{o.kind, o.tag, {}};
  out.children.reserve(o.children.size());
  for (const auto& c : o.children) out.children.push_back(substitute(c, parts, next, level, transparent));
  return out;
}

}  // namespace

const Listing& Engine::Impl::listing(Node* nd, std::size_t n) {
  auto found = nd->listed.find(n);
  if (found != nd->listed.end()) return found->second;

  // Counting first rejects ill-founded and constant-term errors before the
  // recursion below can loop.
  coeff(nd, n);

  const Expr* e = nd->e;
  Listing out;
  auto append_pairs = [&](Node* first, Node* second, auto&& combine) {
    for (std::size_t i = 0; i <= n; ++i) {
      if (sgn(coeff(first, i)) == 0 || sgn(coeff(second, n - i)) == 0) continue;
      const Listing& a = listing(first, i);
      const Listing& b = listing(second, n - i);
      for (const auto& [oa, wa] : a) {
        for (const auto& [ob, wb] : b) out.emplace_back(combine(oa, ob), wa * wb);
      }
    }
  };

  switch (e->op) {
    case Op::kAtom:
      if (!nd->ctx) {
        if (n == 1) out.emplace_back(Object::atom(), Rational(1));
      } else {
        for (const auto& [o, w] : listing(kid(nd, 0), n)) {
          out.emplace_back(nd->ctx->transparent ? o : Object::carrier(nd->ctx->level, o), w);
        }
      }
      break;
    case Op::kEpsilon:
      if (n == 0) out.emplace_back(Object::epsilon(), Rational(1));
      break;
    case Op::kStar:
      if (n == 0) out.emplace_back(Object::star(), Rational(1));
      break;
    case Op::kZero:
      break;
    case Op::kScale:
      for (const auto& [o, w] : listing(kid(nd, 0), n)) out.emplace_back(o, w * e->factor);
      break;
    case Op::kEscape:
    case Op::kRef:
    case Op::kCompose:
      out = listing(kid(nd, 0), n);
      break;
    case Op::kUnion:
      for (int b = 0; b < 2; ++b) {
        for (const auto& [o, w] : listing(kid(nd, b), n)) {
          out.emplace_back(make(NodeKind::kUnion, {o}, b), w);
        }
      }
      break;
    case Op::kMarkedSum:
      for (int b = 0; b < 2; ++b) {
        const Listing& l = listing(kid(nd, b), n);
        out.insert(out.end(), l.begin(), l.end());
      }
      break;
    case Op::kProduct:
      append_pairs(kid(nd, 0), kid(nd, 1), [](const Object& a, const Object& b) {
        return make(NodeKind::kProduct, {a, b});
      });
      break;
    case Op::kMarkedSet:
      append_pairs(kid(nd, 1), kid(nd, 0), [](const Object& derived, const Object& set) {
        Object o = set;
        o.children.push_back(derived);
        return o;
      });
      break;
    case Op::kMarkedSeq:
      append_pairs(kid(nd, 0), kid(nd, 1), [](const Object& prefix, const Object& rest) {
        // rest = (derived element, suffix sequence)
        Object o = prefix;
        o.children.push_back(rest.children.at(0));
        for (const auto& c : rest.children.at(1).children) o.children.push_back(c);
        return o;
      });
      break;
    case Op::kSeq: {
      if (n == 0) {
        out.emplace_back(make(NodeKind::kSeq, {}), Rational(1));
        break;
      }
      Node* s = kid(nd, 0);
      for (std::size_t m = 1; m <= n; ++m) {
        if (sgn(coeff(s, m)) == 0 || sgn(coeff(nd, n - m)) == 0) continue;
        const Listing& heads = listing(s, m);
        const Listing& tails = listing(nd, n - m);
        for (const auto& [h, wh] : heads) {
          for (const auto& [t, wt] : tails) {
            Object o = make(NodeKind::kSeq, {h});
            o.children.insert(o.children.end(), t.children.begin(), t.children.end());
            out.emplace_back(std::move(o), wh * wt);
          }
        }
      }
      break;
    }
    case Op::kSet: {
      // Multisets as non-decreasing sequences of item indices; items are the
      // element orbits of sizes 1..n.
      Node* s = powered(nd, 1);
      std::vector<std::pair<const Object*, const Rational*>> items;
      std::vector<std::size_t> item_size;
      for (std::size_t m = 1; m <= n; ++m) {
        if (sgn(coeff(s, m)) == 0) continue;
        for (const auto& [o, w] : listing(s, m)) {
          items.emplace_back(&o, &w);
          item_size.push_back(m);
        }
      }
      std::vector<std::size_t> chosen;
      auto rec = [&](auto&& self, std::size_t from, std::size_t left, Rational w) -> void {
        if (left == 0) {
          Object o = make(NodeKind::kSet, {});
          for (std::size_t idx : chosen) o.children.push_back(*items[idx].first);
          out.emplace_back(std::move(o), w);
          return;
        }
        for (std::size_t i = from; i < items.size(); ++i) {
          if (item_size[i] > left) continue;
          chosen.push_back(i);
          self(self, i, left - item_size[i], w * *items[i].second);
          chosen.pop_back();
        }
      };
      rec(rec, 0, n, Rational(1));
      break;
    }
    case Op::kTable: {
      if (!nd->ctx) {
        for (const auto& entry : e->table) {
          if (entry.object.size() == n) out.emplace_back(entry.object, entry.weight);
        }
        break;
      }
      // Every assignment of inner objects to the atoms, up to isomorphism.
      Node* a = node(atom_.get(), nd->ctx, nd->p);
      std::map<std::string, std::pair<Object, Rational>> unique;
      for (const auto& entry : e->table) {
        const std::size_t atoms = entry.object.size();
        if (atoms > n || (atoms == 0 && n != 0)) continue;
        std::vector<const Object*> parts(atoms);
        auto rec = [&](auto&& self, std::size_t pos, std::size_t left, Rational w) -> void {
          if (pos == atoms) {
            if (left != 0) return;
            std::size_t next = 0;
            Object o = substitute(entry.object, parts, next, 0, true);
            std::string k = canonicalize_in_place(o);
            unique.try_emplace(std::move(k), std::move(o), w);
            return;
          }
          const std::size_t remaining_atoms = atoms - pos - 1;
          for (std::size_t m = 1; m + remaining_atoms <= left; ++m) {
            if (sgn(coeff(a, m)) == 0) continue;
            for (const auto& [o, wo] : listing(a, m)) {
              parts[pos] = &o;
              self(self, pos + 1, left - m, w * wo);
            }
          }
        };
        rec(rec, 0, n, entry.weight);
      }
      for (auto& [k, v] : unique) out.push_back(std::move(v));
      break;
    }
    default:
      throw SpecError("cannot enumerate " + to_dsl(*e));
  }
  return nd->listed.emplace(n, std::move(out)).first->second;
}

}  // namespace gibbs
