#include <algorithm>

#include "engine_impl.hpp"

namespace gibbs {

namespace {

inline constexpr std::size_t kMaxExplicitBlock = 4096;

BigInt binomial(const BigInt& top, unsigned long k) {
  BigInt out;
  mpz_bin_ui(out.get_mpz_t(), top.get_mpz_t(), k);
  return out;
}

BigInt floor_of(const Rational& q) {
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

// The idx-th multiset (lexicographic, as a non-decreasing list) of q items
// drawn from {0, ..., k-1}.
std::vector<BigInt> unrank_multiset(const BigInt& k, std::size_t q, BigInt idx) {
  std::vector<BigInt> out;
  BigInt offset = 0;
  BigInt items = k;
  for (std::size_t left = q; left > 0; --left) {
    if (left == 1) {
      out.push_back(offset + idx);
      break;
    }
    // f(x): multisets of `left` items from {x, ..., items-1}.
    auto f = [&](const BigInt& x) { return binomial(items - x + left - 1, left); };
    const BigInt total = f(0);
    const BigInt target = total - idx;
    BigInt lo = 0, hi = items - 1;
    while (lo < hi) {
      BigInt mid = (lo + hi + 1) / 2;
      if (f(mid) >= target) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    idx -= total - f(lo);
    out.push_back(offset + lo);
    offset += lo;
    items -= lo;
  }
  return out;
}

// Index of the cell of t in the cumulative vector (cum[i] <= t < cum[i+1]).
std::size_t locate(const std::vector<Rational>& cum, const Rational& t) {
  auto it = std::upper_bound(cum.begin(), cum.end(), t);
  return static_cast<std::size_t>(it - cum.begin()) - 1;
}

}  // namespace

Pick Engine::Impl::unrank_pair(Node* first, Node* second, Node* owner, std::size_t n,
                               const Rational& t, std::pair<Object, Object>& parts) {
  auto [it, fresh_entry] = owner->cumulative.try_emplace(n);
  std::vector<Rational>& cum = it->second;
  if (fresh_entry) {
    cum.assign(1, Rational(0));
    for (std::size_t i = 0; i <= n; ++i) {
      Rational cell = 0;
      const Rational a = coeff(first, i);
      if (sgn(a) != 0) cell = a * coeff(second, n - i);
      cum.push_back(cum.back() + cell);
    }
  }
  const std::size_t i = locate(cum, t);
  const Rational b = coeff(second, n - i);
  Pick pa = unrank(first, i, (t - cum[i]) / b);
  Pick pb = unrank(second, n - i, pa.r * b / pa.w);
  parts = {std::move(pa.obj), std::move(pb.obj)};
  return {Object{}, pa.w * pb.w, pa.w * pb.r};
}

Pick Engine::Impl::unrank(Node* nd, std::size_t n, const Rational& t) {
  const Expr* e = nd->e;
  switch (e->op) {
    case Op::kAtom: {
      if (!nd->ctx) return {Object::atom(), 1, t};
      Pick p = unrank(kid(nd, 0), n, t);
      if (!nd->ctx->transparent) p.obj = Object::carrier(nd->ctx->level, std::move(p.obj));
      return p;
    }
    case Op::kEpsilon:
      return {Object::epsilon(), 1, t};
    case Op::kStar:
      return {Object::star(), 1, t};
    case Op::kScale: {
      Pick p = unrank(kid(nd, 0), n, t / e->factor);
      p.w *= e->factor;
      p.r *= e->factor;
      return p;
    }
    case Op::kEscape:
    case Op::kRef:
    case Op::kCompose:
      return unrank(kid(nd, 0), n, t);
    case Op::kUnion:
    case Op::kMarkedSum: {
      const Rational a = coeff(kid(nd, 0), n);
      const int branch = t < a ? 0 : 1;
      Pick p = unrank(kid(nd, branch), n, branch == 0 ? t : Rational(t - a));
      if (e->op == Op::kUnion) p.obj = Object{NodeKind::kUnion, branch, {std::move(p.obj)}};
      return p;
    }
    case Op::kProduct: {
      std::pair<Object, Object> parts;
      Pick p = unrank_pair(kid(nd, 0), kid(nd, 1), nd, n, t, parts);
      p.obj = Object{NodeKind::kProduct, 0, {std::move(parts.first), std::move(parts.second)}};
      return p;
    }
    case Op::kMarkedSet: {
      std::pair<Object, Object> parts;
      Pick p = unrank_pair(kid(nd, 1), kid(nd, 0), nd, n, t, parts);
      p.obj = std::move(parts.second);
      p.obj.children.push_back(std::move(parts.first));
      return p;
    }
    case Op::kMarkedSeq: {
      std::pair<Object, Object> parts;
      Pick p = unrank_pair(kid(nd, 0), kid(nd, 1), nd, n, t, parts);
      p.obj = std::move(parts.first);
      Object& rest = parts.second;
      p.obj.children.push_back(std::move(rest.children.at(0)));
      for (auto& c : rest.children.at(1).children) p.obj.children.push_back(std::move(c));
      return p;
    }
    case Op::kSeq: {
      if (n == 0) return {Object{NodeKind::kSeq, 0, {}}, 1, t};
      std::pair<Object, Object> parts;
      Pick p = unrank_pair(kid(nd, 0), nd, nd, n, t, parts);
      p.obj = Object{NodeKind::kSeq, 0, {std::move(parts.first)}};
      for (auto& c : parts.second.children) p.obj.children.push_back(std::move(c));
      return p;
    }
    case Op::kSet:
      return unrank_set(nd, n, t);
    case Op::kTable: {
      if (nd->ctx) throw Unsupported("unranking a TABLE-weighted species inside a composition");
      Rational acc = 0;
      for (const auto& entry : e->table) {
        if (entry.object.size() != n || sgn(entry.weight) == 0) continue;
        if (t < acc + entry.weight) return {entry.object, entry.weight, t - acc};
        acc += entry.weight;
      }
      throw EmptySize("no TABLE entry at this position");
    }
    default:
      throw EmptySize("no objects to unrank in " + to_dsl(*e));
  }
}

const Rational& Engine::Impl::block_count(Node* nd, std::size_t s, std::size_t j) {
  if (nd->hblock.size() <= s) nd->hblock.resize(s + 1);
  auto& h = nd->hblock[s];
  if (h.empty()) h.push_back(1);
  while (h.size() <= j) {
    const std::size_t q = h.size();
    Rational sum = 0;
    for (std::size_t r = 1; r <= q; ++r) {
      const Rational c = coeff(powered(nd, static_cast<unsigned>(r)), s);
      if (sgn(c) != 0) sum += c * h[q - r];
    }
    sum /= static_cast<unsigned long>(q);
    h.push_back(std::move(sum));
  }
  return h[j];
}

const Rational& Engine::Impl::set_table(Node* nd, std::size_t m, std::size_t s) {
  s = std::min(s, m);
  auto& tab = nd->mtab;
  while (tab.size() <= m) {
    const std::size_t mm = tab.size();
    std::vector<Rational> row(mm + 1);
    row[0] = mm == 0 ? 1 : 0;
    for (std::size_t level = 1; level <= mm; ++level) {
      Rational sum = row[level - 1];
      for (std::size_t j = 1; j * level <= mm; ++j) {
        const std::size_t rest = mm - j * level;
        const Rational below = tab[rest][std::min(level - 1, rest)];
        if (sgn(below) == 0) continue;
        const Rational h = block_count(nd, level, j);
        if (sgn(h) != 0) sum += h * below;
      }
      row[level] = std::move(sum);
    }
    tab.push_back(std::move(row));
  }
  return tab[m][s];
}

const HomogeneityInfo& Engine::Impl::homogeneity(Node* nd, std::size_t s) {
  auto it = nd->homogeneity.find(s);
  if (it != nd->homogeneity.end()) return it->second;
  HomogeneityInfo info;
  const Rational k = coeff(powered(nd, 0), s);
  const Rational w1 = coeff(powered(nd, 1), s);
  const Rational w2 = coeff(powered(nd, 2), s);
  info.count = k.get_num();
  info.homogeneous = sgn(k) > 0 && w1 * w1 == k * w2;
  if (info.homogeneous) info.weight = w1 / k;
  return nd->homogeneity.emplace(s, std::move(info)).first->second;
}

std::vector<Object> Engine::Impl::unrank_block(Node* nd, std::size_t s, std::size_t j,
                                               const Rational& t, Rational& w, Rational& r) {
  Node* elem = powered(nd, 1);
  std::vector<Object> out;
  const HomogeneityInfo& info = homogeneity(nd, s);
  if (info.homogeneous) {
    const Rational wj = pow(info.weight, j);
    const Rational scaled = t / wj;
    const BigInt idx = floor_of(scaled);
    w = wj;
    r = t - Rational(idx) * wj;
    std::vector<BigInt> picks = unrank_multiset(info.count, j, idx);
    for (std::size_t a = 0; a < picks.size();) {
      std::size_t b = a;
      while (b < picks.size() && picks[b] == picks[a]) ++b;
      Object o = unrank(elem, s, Rational(picks[a]) * info.weight).obj;
      for (std::size_t c = a; c + 1 < b; ++c) out.push_back(o);
      out.push_back(std::move(o));
      a = b;
    }
    return out;
  }

  // Mixed weights: walk the explicit list. W(i, q) is the weight of the
  // multisets of q items among items i..K-1.
  std::vector<const std::pair<Object, Rational>*> items;
  for (const auto& entry : listing(elem, s)) {
    if (sgn(entry.second) != 0) items.push_back(&entry);
  }
  if (items.size() > kMaxExplicitBlock) {
    throw Unsupported("unranking a multiset over " + std::to_string(items.size()) +
                      " differently weighted objects");
  }
  const std::size_t k = items.size();
  std::vector<std::vector<Rational>> tab(k + 1, std::vector<Rational>(j + 1, Rational(0)));
  for (std::size_t i = 0; i <= k; ++i) tab[i][0] = 1;
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t q = 1; q <= j; ++q) tab[i][q] = tab[i + 1][q] + items[i]->second * tab[i][q - 1];
  }
  Rational rest = t;
  Rational scale = 1;
  std::size_t i = 0;
  for (std::size_t q = j; q > 0;) {
    const Rational take = items[i]->second * tab[i][q - 1];
    if (rest < take) {
      out.push_back(items[i]->first);
      rest /= items[i]->second;
      scale *= items[i]->second;
      --q;
    } else {
      rest -= take;
      ++i;
    }
  }
  w = scale;
  r = scale * rest;
  return out;
}

Pick Engine::Impl::unrank_set(Node* nd, std::size_t n, const Rational& t) {
  Object set{NodeKind::kSet, 0, {}};
  Rational weight = 1;
  Rational rest = t;
  std::size_t m = n;
  std::size_t cap = n;
  while (m > 0) {
    // Largest part size s: the first level (from the top) whose block of
    // multisets without parts of size s does not contain the target.
    std::size_t lo = 1, hi = std::min(cap, m);
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (set_table(nd, m, mid - 1) <= rest) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    const std::size_t s = lo;
    rest -= set_table(nd, m, s - 1);
    std::size_t j = 1;
    for (;; ++j) {
      if (j * s > m) throw EmptySize("multiset unranking ran past the block table");
      const Rational block = block_count(nd, s, j) * set_table(nd, m - j * s, s - 1);
      if (rest < block) break;
      rest -= block;
    }
    const Rational below = set_table(nd, m - j * s, s - 1);
    Rational wb, rb;
    std::vector<Object> parts = unrank_block(nd, s, j, rest / below, wb, rb);
    for (auto& o : parts) set.children.push_back(std::move(o));
    weight *= wb;
    rest = rb * below / wb;
    m -= j * s;
    cap = s - 1;
  }
  return {std::move(set), weight, weight * rest};
}

}  // namespace gibbs
