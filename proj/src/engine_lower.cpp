#include <set>
#include <unordered_set>

#include "engine_impl.hpp"

namespace gibbs {

namespace {

ExprPtr with_args(const ExprPtr& e, std::vector<ExprPtr> args) {
  if (args == e->args) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->args = std::move(args);
  return copy;
}

// Replaces the atom with DFS index `target` by a star; `seen` counts atoms.
bool mark_atom(Object& o, std::size_t target, std::size_t& seen) {
  if (o.kind == NodeKind::kAtom) {
    if (seen++ == target) {
      o = Object::star();
      return true;
    }
    return false;
  }
  for (auto& c : o.children) {
    if (mark_atom(c, target, seen)) return true;
  }
  return false;
}

}  // namespace

Engine::Impl::Impl(SpeciesSpec s, std::size_t trunc) : spec(std::move(s)), eval_truncation(trunc) {}

const ExprPtr& Engine::Impl::body(const std::string& name) {
  auto it = core_defs.find(name);
  if (it != core_defs.end()) return it->second;
  if (!spec.has_definition(name)) throw SpecError("unknown name '" + name + "'");
  // Insert first: lowering never follows references, so this cannot recurse
  // back into the same name.
  ExprPtr lowered_body = lower(spec.definition(name));
  return core_defs.emplace(name, std::move(lowered_body)).first->second;
}

ExprPtr Engine::Impl::lower(const ExprPtr& source) {
  auto it = lowered.find(source.get());
  if (it != lowered.end()) return it->second.second;

  ExprPtr out;
  switch (source->op) {
    case Op::kAtom:
    case Op::kEpsilon:
    case Op::kStar:
    case Op::kZero:
    case Op::kTable:
      out = source;
      break;
    case Op::kRef:
      if (!spec.has_definition(source->name) && !core_defs.count(source->name)) {
        throw SpecError("unknown name '" + source->name + "'");
      }
      out = source;
      break;
    case Op::kDerive:
      out = derivative(lower(source->args.at(0)), star_);
      break;
    case Op::kWeighted: {
      ExprPtr inner = lower(source->args.at(0));
      const WeightModel& w = source->weight;
      switch (w.kind) {
        case WeightModel::Kind::kUnit:
          out = inner;
          break;
        case WeightModel::Kind::kAtomMultiplicative:
          out = build::compose(inner, build::scale(w.factor, atom_));
          break;
        case WeightModel::Kind::kTable:
          validate_table(inner, w.table);
          out = build::table(w.table);
          break;
      }
      break;
    }
    default: {
      std::vector<ExprPtr> args;
      args.reserve(source->args.size());
      for (const auto& a : source->args) args.push_back(lower(a));
      out = with_args(source, std::move(args));
    }
  }
  lowered.emplace(source.get(), std::make_pair(source, out));
  return out;
}

void Engine::Impl::validate_table(const ExprPtr& domain, const std::vector<TableEntry>& entries) {
  std::map<std::size_t, std::set<std::string>> keys_by_size;
  for (const auto& entry : entries) {
    const std::size_t s = entry.object.size();
    if (s > kDefaultEnumerationGuard) continue;  // too large to check by listing
    auto [it, fresh_size] = keys_by_size.try_emplace(s);
    if (fresh_size) {
      for (const auto& [obj, w] : listing(node(domain.get(), nullptr, 1), s)) {
        it->second.insert(key_of(obj));
      }
    }
    if (!it->second.count(entry.key)) {
      throw SpecError("TABLE entry '" + entry.key + "' is not an object of " + to_dsl(*domain));
    }
  }
}

ExprPtr Engine::Impl::derivative(const ExprPtr& e, const ExprPtr& h) {
  const auto key = std::make_pair(e.get(), h.get());
  auto it = derivatives.find(key);
  if (it != derivatives.end()) return it->second.second;

  auto is_zero = [](const ExprPtr& x) { return x->op == Op::kZero; };
  ExprPtr out;
  switch (e->op) {
    case Op::kAtom:
      out = h;
      break;
    case Op::kEpsilon:
    case Op::kZero:
      out = zero_;
      break;
    case Op::kStar:
    case Op::kEscape:
    case Op::kMarkedSet:
    case Op::kMarkedSeq:
    case Op::kMarkedSum:
      throw Unsupported("repeated derivation is not supported");
    case Op::kTable: {
      if (h != star_) throw Unsupported("derivative of a TABLE-weighted species inside a composition");
      std::map<std::string, TableEntry> derived;
      for (const auto& entry : e->table) {
        const std::size_t atoms = entry.object.size();
        for (std::size_t i = 0; i < atoms; ++i) {
          Object o = entry.object;
          std::size_t seen = 0;
          mark_atom(o, i, seen);
          std::string k = canonicalize_in_place(o);
          derived.try_emplace(k, TableEntry{std::move(o), k, entry.weight});
        }
      }
      std::vector<TableEntry> entries;
      for (auto& [k, v] : derived) entries.push_back(std::move(v));
      out = entries.empty() ? zero_ : build::table(std::move(entries));
      break;
    }
    case Op::kUnion: {
      ExprPtr a = derivative(e->args[0], h);
      ExprPtr b = derivative(e->args[1], h);
      out = is_zero(a) && is_zero(b) ? zero_ : build::union_of(a, b);
      break;
    }
    case Op::kProduct: {
      ExprPtr da = derivative(e->args[0], h);
      ExprPtr db = derivative(e->args[1], h);
      ExprPtr left = is_zero(da) ? nullptr : build::product(da, e->args[1]);
      ExprPtr right = is_zero(db) ? nullptr : build::product(e->args[0], db);
      if (left && right) {
        out = build::marked_sum(left, right);
      } else {
        out = left ? left : right ? right : zero_;
      }
      break;
    }
    case Op::kSet: {
      ExprPtr d = derivative(e->args[0], h);
      out = is_zero(d) ? zero_ : build::marked_set(e, d);
      break;
    }
    case Op::kSeq: {
      ExprPtr d = derivative(e->args[0], h);
      out = is_zero(d) ? zero_ : build::marked_seq(e, build::product(d, e));
      break;
    }
    case Op::kCompose: {
      ExprPtr dg = derivative(e->args[1], h);
      if (is_zero(dg)) {
        out = zero_;
        break;
      }
      ExprPtr df = derivative(e->args[0], build::escape(dg));
      out = is_zero(df) ? zero_ : build::compose(df, e->args[1]);
      break;
    }
    case Op::kScale: {
      ExprPtr d = derivative(e->args[0], h);
      out = is_zero(d) ? zero_ : build::scale(e->factor, d);
      break;
    }
    case Op::kRef: {
      const auto name_key = std::make_pair(e->name, h.get());
      auto named = derived_names.find(name_key);
      if (named == derived_names.end()) {
        std::string name = e->name + "'";
        if (h != star_) name += "#" + std::to_string(++fresh);
        named = derived_names.emplace(name_key, name).first;
        // The name must exist before its body is derived, for recursion.
        core_defs[name] = zero_;
        ExprPtr b = derivative(body(e->name), h);
        core_defs[name] = b;
      }
      out = build::ref(named->second);
      break;
    }
    default:
      throw Unsupported("derivative of an unlowered expression");
  }
  derivatives.emplace(key, std::make_pair(e, out));
  keep.push_back(h);
  return out;
}

bool Engine::Impl::invariant(const Expr* e) {
  auto it = invariants.find(e);
  if (it != invariants.end()) return it->second;
  std::vector<const Expr*> stack{e};
  std::unordered_set<const Expr*> seen;
  bool inv = true;
  while (!stack.empty() && inv) {
    const Expr* x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    if (x->op == Op::kScale && x->factor != 1) inv = false;
    if (x->op == Op::kTable) {
      for (const auto& entry : x->table) {
        if (entry.weight != 0 && entry.weight != 1) inv = false;
      }
    }
    if (x->op == Op::kRef) stack.push_back(body(x->name).get());
    for (const auto& a : x->args) stack.push_back(a.get());
  }
  invariants[e] = inv;
  return inv;
}

}  // namespace gibbs
