#include "gibbs/cycle_index.hpp"

#include <algorithm>

#include "gibbs/error.hpp"

namespace gibbs {

// ---------------------------------------------------------------- CycleType

CycleType::CycleType(std::map<unsigned, unsigned> multiplicities) {
  for (auto [i, m] : multiplicities) {
    if (i == 0) throw PreconditionError("cycle lengths start at 1");
    if (m != 0) m_[i] = m;
  }
}

unsigned CycleType::operator[](unsigned i) const {
  auto it = m_.find(i);
  return it == m_.end() ? 0 : it->second;
}

std::size_t CycleType::degree() const {
  std::size_t d = 0;
  for (auto [i, m] : m_) d += static_cast<std::size_t>(i) * m;
  return d;
}

std::size_t CycleType::cycles() const {
  std::size_t c = 0;
  for (auto [i, m] : m_) c += m;
  return c;
}

void CycleType::add(unsigned i, unsigned count) {
  if (count == 0) return;
  if (i == 0) throw PreconditionError("cycle lengths start at 1");
  m_[i] += count;
}

nlohmann::json CycleType::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (auto [i, m] : m_) j[std::to_string(i)] = m;
  return j;
}

CycleType CycleType::from_json(const nlohmann::json& j) {
  std::map<unsigned, unsigned> m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    m[static_cast<unsigned>(std::stoul(it.key()))] = it.value().get<unsigned>();
  }
  return CycleType(m);
}

// ------------------------------------------------------------ CycleIndexPoly

namespace {

using Factors = std::vector<std::vector<Rational>>;

// Factor i cut to degree floor(N / i), trailing zeros removed; an empty
// vector stands for the constant 0 and {1} for the constant 1.
std::vector<Rational> normalize_factor(std::vector<Rational> f, std::size_t i, std::size_t n) {
  f.resize(std::min(f.size(), n / i + 1));
  while (!f.empty() && sgn(f.back()) == 0) f.pop_back();
  return f;
}

bool trivial_factor(const std::vector<Rational>& f) { return f.size() == 1 && f[0] == 1; }

const std::vector<Rational>& unit_factor() {
  static const std::vector<Rational> one{Rational(1)};
  return one;
}

const std::vector<Rational>& factor_at(const Factors& f, std::size_t i) {
  return i < f.size() ? f[i] : unit_factor();
}

// Univariate product truncated to degree `cap`.
std::vector<Rational> poly_mul(const std::vector<Rational>& a, const std::vector<Rational>& b,
                               std::size_t cap) {
  if (a.empty() || b.empty()) return {};
  std::size_t len = std::min(a.size() + b.size() - 1, cap + 1);
  std::vector<Rational> out(len, Rational(0));
  for (std::size_t i = 0; i < a.size() && i < len; ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size() && i + j < len; ++j) {
      if (sgn(b[j]) == 0) continue;
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

void check_nonnegative(const Rational& c) {
  if (sgn(c) < 0) throw PreconditionError("cycle index coefficients must be non-negative");
}

CycleIndexPoly::Terms sparse_mul(const CycleIndexPoly::Terms& a, const CycleIndexPoly::Terms& b,
                                 std::size_t n) {
  CycleIndexPoly::Terms out;
  for (const auto& [ta, ca] : a) {
    std::size_t da = ta.degree();
    for (const auto& [tb, cb] : b) {
      if (da + tb.degree() > n) continue;
      auto m = ta.multiplicities();
      for (auto [i, k] : tb.multiplicities()) m[i] += k;
      out[CycleType(m)] += ca * cb;
    }
  }
  std::erase_if(out, [](const auto& kv) { return sgn(kv.second) == 0; });
  return out;
}

}  // namespace

CycleIndexPoly::CycleIndexPoly(std::size_t truncation) : truncation_(truncation) {
  terms_.emplace();
}

CycleIndexPoly CycleIndexPoly::from_terms(const Terms& terms, std::size_t truncation) {
  CycleIndexPoly z(truncation);
  for (const auto& [t, c] : terms) {
    check_nonnegative(c);
    if (t.degree() <= truncation && sgn(c) != 0) (*z.terms_)[t] += c;
  }
  return z;
}

CycleIndexPoly CycleIndexPoly::from_factors(Factors factors, std::size_t truncation) {
  CycleIndexPoly z(truncation);
  z.terms_.reset();
  Factors f(std::max<std::size_t>(factors.size(), 2));
  f[0] = unit_factor();
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (i < factors.size()) {
      for (const auto& c : factors[i]) check_nonnegative(c);
      f[i] = normalize_factor(std::move(factors[i]), i, truncation);
    } else {
      f[i] = unit_factor();
    }
  }
  // Drop trailing trivial factors.
  while (f.size() > 2 && trivial_factor(f.back())) f.pop_back();
  z.factors_ = std::move(f);
  return z;
}

CycleIndexPoly CycleIndexPoly::one(std::size_t truncation) {
  return from_factors({{}, {Rational(1)}}, truncation);
}

CycleIndexPoly CycleIndexPoly::atom(std::size_t truncation) {
  return from_factors({{}, {Rational(0), Rational(1)}}, truncation);
}

Rational CycleIndexPoly::coeff(const CycleType& t) const {
  if (t.degree() > truncation_) return Rational(0);
  if (factors_) {
    const auto& f = *factors_;
    Rational c(1);
    // Every factor contributes: its m_i coefficient (m_i = 0 for absent i).
    std::size_t max_i = std::max(f.size() - 1, t.multiplicities().empty()
                                                   ? std::size_t{0}
                                                   : static_cast<std::size_t>(
                                                         t.multiplicities().rbegin()->first));
    for (std::size_t i = 1; i <= max_i; ++i) {
      const auto& fi = factor_at(f, i);
      unsigned m = t[static_cast<unsigned>(i)];
      if (m >= fi.size()) return Rational(0);
      c *= fi[m];
      if (sgn(c) == 0) return c;
    }
    return c;
  }
  auto it = terms_->find(t);
  return it == terms_->end() ? Rational(0) : it->second;
}

const CycleIndexPoly::Terms& CycleIndexPoly::terms() const {
  std::lock_guard<std::mutex> guard(*expand_lock_);
  if (terms_) return *terms_;
  if (truncation_ > kMaxExpandedTruncation) {
    throw SizeGuardExceeded("cycle index expansion beyond degree " +
                            std::to_string(kMaxExpandedTruncation));
  }
  Terms out;
  const auto& f = *factors_;
  const std::size_t n = truncation_;
  std::map<unsigned, unsigned> current;
  // Choose m_i for i = n, n-1, ..., 1.
  std::function<void(std::size_t, std::size_t, const Rational&)> rec =
      [&](std::size_t i, std::size_t budget, const Rational& c) {
        if (i == 0) {
          out[CycleType(current)] += c;
          return;
        }
        const auto& fi = factor_at(f, i);
        for (std::size_t m = 0; m < fi.size() && m * i <= budget; ++m) {
          if (sgn(fi[m]) == 0) continue;
          if (m > 0) current[static_cast<unsigned>(i)] = static_cast<unsigned>(m);
          rec(i - 1, budget - m * i, c * fi[m]);
          current.erase(static_cast<unsigned>(i));
        }
      };
  rec(n, n, Rational(1));
  terms_ = std::move(out);
  return *terms_;
}

std::vector<Rational> CycleIndexPoly::degree_sums() const {
  std::vector<Rational> s(truncation_ + 1, Rational(0));
  if (factors_) {
    std::vector<Rational> acc{Rational(1)};
    for (std::size_t i = 1; i < factors_->size(); ++i) {
      const auto& fi = (*factors_)[i];
      if (fi.empty()) return s;
      std::vector<Rational> spread(std::min(truncation_, (fi.size() - 1) * i) + 1, Rational(0));
      for (std::size_t m = 0; m < fi.size() && m * i <= truncation_; ++m) spread[m * i] = fi[m];
      acc = poly_mul(acc, spread, truncation_);
    }
    for (std::size_t k = 0; k < acc.size(); ++k) s[k] = acc[k];
    return s;
  }
  for (const auto& [t, c] : *terms_) s[t.degree()] += c;
  return s;
}

CycleIndexPoly CycleIndexPoly::truncated(std::size_t truncation) const {
  if (factors_) return from_factors(*factors_, truncation);
  return from_terms(*terms_, truncation);
}

nlohmann::json CycleIndexPoly::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [t, c] : terms()) {
    arr.push_back({{"cycle_type", t.to_json()}, {"coeff", to_string(c)}});
  }
  return arr;
}

CycleIndexPoly CycleIndexPoly::from_json(const nlohmann::json& j, std::size_t truncation) {
  try {
    Terms terms;
    for (const auto& e : j) {
      terms[CycleType::from_json(e.at("cycle_type"))] +=
          parse_rational(e.at("coeff").get<std::string>());
    }
    return from_terms(terms, truncation);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed cycle index json: ") + e.what());
  }
}

bool CycleIndexPoly::operator==(const CycleIndexPoly& other) const {
  if (truncation_ != other.truncation_) return false;
  if (factors_ && other.factors_) {
    std::size_t len = std::max(factors_->size(), other.factors_->size());
    bool same = true;
    for (std::size_t i = 1; i < len && same; ++i) {
      same = factor_at(*factors_, i) == factor_at(*other.factors_, i);
    }
    if (same) return true;
  }
  return terms() == other.terms();
}

// --------------------------------------------------------------- builders

CycleIndexPoly z_set(std::size_t truncation) {
  Factors f(truncation + 1);
  for (std::size_t i = 1; i <= truncation; ++i) {
    // exp(z_i / i) = sum_m z_i^m / (i^m m!)
    std::size_t len = truncation / i + 1;
    f[i].resize(len);
    f[i][0] = 1;
    for (std::size_t m = 1; m < len; ++m) {
      f[i][m] = f[i][m - 1] / static_cast<unsigned long>(i * m);
    }
  }
  return CycleIndexPoly::from_factors(std::move(f), truncation);
}

CycleIndexPoly z_seq(std::size_t truncation) {
  Factors f(2);
  f[1].assign(truncation + 1, Rational(1));
  return CycleIndexPoly::from_factors(std::move(f), truncation);
}

CycleIndexPoly add(const CycleIndexPoly& a, const CycleIndexPoly& b) {
  std::size_t n = std::min(a.truncation(), b.truncation());
  CycleIndexPoly::Terms t = a.truncated(n).terms();
  const CycleIndexPoly bn = b.truncated(n);
  for (const auto& [k, c] : bn.terms()) t[k] += c;
  return CycleIndexPoly::from_terms(t, n);
}

CycleIndexPoly mul(const CycleIndexPoly& a, const CycleIndexPoly& b) {
  std::size_t n = std::min(a.truncation(), b.truncation());
  if (a.is_factored() && b.is_factored()) {
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    Factors f(std::max(fa.size(), fb.size()));
    for (std::size_t i = 1; i < f.size(); ++i) {
      f[i] = poly_mul(factor_at(fa, i), factor_at(fb, i), n / i);
    }
    return CycleIndexPoly::from_factors(std::move(f), n);
  }
  return CycleIndexPoly::from_terms(
      sparse_mul(a.truncated(n).terms(), b.truncated(n).terms(), n), n);
}

CycleIndexPoly scale(const CycleIndexPoly& a, const Rational& c) {
  check_nonnegative(c);
  if (a.is_factored()) {
    Factors f = a.factors();
    for (auto& x : f[1]) x *= c;
    return CycleIndexPoly::from_factors(std::move(f), a.truncation());
  }
  CycleIndexPoly::Terms t = a.terms();
  for (auto& [k, v] : t) v *= c;
  return CycleIndexPoly::from_terms(t, a.truncation());
}

CycleIndexPoly derivative_z1(const CycleIndexPoly& z) {
  std::size_t n = z.truncation() == 0 ? 0 : z.truncation() - 1;
  if (z.truncation() == 0) return CycleIndexPoly(0);
  if (z.is_factored()) {
    Factors f = z.factors();
    std::vector<Rational> d;
    for (std::size_t m = 1; m < f[1].size(); ++m) {
      d.push_back(f[1][m] * static_cast<unsigned long>(m));
    }
    f[1] = std::move(d);
    return CycleIndexPoly::from_factors(std::move(f), n);
  }
  CycleIndexPoly::Terms out;
  for (const auto& [t, c] : z.terms()) {
    unsigned m1 = t[1];
    if (m1 == 0) continue;
    auto m = t.multiplicities();
    if (m1 == 1) {
      m.erase(1);
    } else {
      m[1] = m1 - 1;
    }
    out[CycleType(m)] += c * m1;
  }
  return CycleIndexPoly::from_terms(out, n);
}

CycleIndexPoly scale_atoms(const CycleIndexPoly& z, const Rational& c) {
  check_nonnegative(c);
  if (z.is_factored()) {
    Factors f = z.factors();
    for (std::size_t i = 1; i < f.size(); ++i) {
      Rational ci = pow(c, i), p(1);
      for (auto& x : f[i]) {
        x *= p;
        p *= ci;
      }
    }
    return CycleIndexPoly::from_factors(std::move(f), z.truncation());
  }
  CycleIndexPoly::Terms out;
  for (const auto& [t, v] : z.terms()) out[t] = v * pow(c, t.degree());
  return CycleIndexPoly::from_terms(out, z.truncation());
}

CycleIndexPoly power_sum_substitute(const CycleIndexPoly& z, unsigned k) {
  if (k == 0) throw PreconditionError("power sum index must be >= 1");
  const std::size_t n = z.truncation();
  if (z.is_factored()) {
    const auto& f = z.factors();
    Factors g(std::min<std::size_t>((f.size() - 1) * k, n) + 1, unit_factor());
    if (g.size() < 2) g.resize(2, unit_factor());
    // Factors pushed beyond degree n only keep their constant terms.
    Rational constant(1);
    for (std::size_t i = 1; i < f.size(); ++i) {
      if (i * k <= n) {
        g[i * k] = f[i];
      } else {
        constant *= f[i].empty() ? Rational(0) : f[i][0];
      }
    }
    if (constant != 1) {
      for (auto& x : g[1]) x *= constant;
    }
    return CycleIndexPoly::from_factors(std::move(g), n);
  }
  CycleIndexPoly::Terms out;
  for (const auto& [t, c] : z.terms()) {
    std::map<unsigned, unsigned> m;
    for (auto [i, mi] : t.multiplicities()) m[i * k] = mi;
    CycleType s(m);
    if (s.degree() <= n) out[s] += c;
  }
  return CycleIndexPoly::from_terms(out, n);
}

// ---------------------------------------------------------------- plethysm

namespace {

TruncatedSeries checked_inner(const SeriesFamily& inner, std::size_t i, std::size_t n) {
  TruncatedSeries g = inner(i);
  if (sgn(g[0]) != 0) {
    throw InnerHasConstantTerm("inner series " + std::to_string(i) +
                               " has a nonzero constant term");
  }
  return substitute_power(g.truncated(n), i);
}

}  // namespace

TruncatedSeries plethysm_with_weights(const CycleIndexPoly& zf, const SeriesFamily& inner) {
  // The truncation of the result is bounded by the inner series as well.
  std::size_t n = std::min(zf.truncation(), inner(1).truncation());
  if (zf.is_factored()) {
    const auto& f = zf.factors();
    TruncatedSeries acc = TruncatedSeries::one(n);
    for (std::size_t i = 1; i < f.size() && i <= n; ++i) {
      const auto& fi = f[i];
      if (trivial_factor(fi)) continue;
      if (fi.empty()) return TruncatedSeries(n);
      // sum_m f_i[m] h^m with h = G_i(z^i), one power at a time.
      TruncatedSeries h = checked_inner(inner, i, n);
      std::vector<Rational> sum(n + 1, Rational(0));
      TruncatedSeries power = TruncatedSeries::one(n);
      for (std::size_t m = 0; m < fi.size() && m * i <= n; ++m) {
        if (m > 0) power = mul(power, h);
        if (sgn(fi[m]) == 0) continue;
        for (std::size_t k = 0; k <= n; ++k) {
          if (sgn(power[k]) != 0) sum[k] += fi[m] * power[k];
        }
      }
      acc = mul(acc, TruncatedSeries(std::move(sum)));
    }
    // Factors of index > n contribute their constant terms.
    for (std::size_t i = n + 1; i < f.size(); ++i) {
      if (f[i].empty()) return TruncatedSeries(n);
      acc = scale(acc, f[i][0]);
    }
    return acc;
  }

  // Sparse: each monomial prod z_i^{m_i} becomes prod (G_i(z^i))^{m_i}.
  const auto& terms = zf.terms();
  std::map<std::size_t, std::vector<TruncatedSeries>> powers;
  auto power_of = [&](std::size_t i, std::size_t m) -> const TruncatedSeries& {
    auto& v = powers[i];
    if (v.empty()) {
      v.push_back(TruncatedSeries::one(n));
      v.push_back(checked_inner(inner, i, n));
    }
    while (v.size() <= m) v.push_back(mul(v.back(), v[1]));
    return v[m];
  };
  std::vector<Rational> out(n + 1, Rational(0));
  for (const auto& [t, c] : terms) {
    if (t.degree() > n) continue;
    TruncatedSeries prod = TruncatedSeries::one(n);
    for (auto [i, m] : t.multiplicities()) prod = mul(prod, power_of(i, m));
    for (std::size_t k = 0; k <= n; ++k) {
      if (sgn(prod[k]) != 0) out[k] += c * prod[k];
    }
  }
  return TruncatedSeries(std::move(out));
}

CycleIndexPoly plethysm(const CycleIndexPoly& zf, const CycleIndexFamily& inner) {
  CycleIndexPoly first = inner(1);
  std::size_t n = std::min(zf.truncation(), first.truncation());
  std::map<unsigned, std::vector<CycleIndexPoly::Terms>> powers;
  auto power_of = [&](unsigned i, unsigned m) -> const CycleIndexPoly::Terms& {
    auto& v = powers[i];
    if (v.empty()) {
      // Degrees above n / i of the i-th inner index do not survive.
      CycleIndexPoly gi = i == 1 ? std::move(first) : inner(i);
      if (gi.truncation() < n / i) throw PreconditionError("inner cycle index truncated too early");
      CycleIndexPoly g = power_sum_substitute(gi.truncated(n), i);
      if (sgn(g.coeff(CycleType())) != 0) {
        throw InnerHasConstantTerm("inner cycle index " + std::to_string(i) +
                                   " has a nonzero constant term");
      }
      v.push_back({{CycleType(), Rational(1)}});
      v.push_back(g.terms());
    }
    while (v.size() <= m) v.push_back(sparse_mul(v.back(), v[1], n));
    return v[m];
  };
  CycleIndexPoly::Terms out;
  const CycleIndexPoly zn = zf.truncated(n);
  for (const auto& [t, c] : zn.terms()) {
    CycleIndexPoly::Terms prod{{CycleType(), c}};
    for (auto [i, m] : t.multiplicities()) prod = sparse_mul(prod, power_of(i, m), n);
    for (const auto& [k, v] : prod) out[k] += v;
  }
  return CycleIndexPoly::from_terms(out, n);
}

TruncatedSeries specialize_ogf(const CycleIndexPoly& z) {
  const std::size_t n = z.truncation();
  std::vector<Rational> out(n + 1, Rational(0));
  if (z.is_factored()) {
    auto sums = z.degree_sums();
    for (std::size_t k = 0; k <= n; ++k) out[k] = sums[k];
    return TruncatedSeries(std::move(out));
  }
  for (const auto& [t, c] : z.terms()) out[t.degree()] += c;
  return TruncatedSeries(std::move(out));
}

CycleIndexEvaluation evaluate_at(const CycleIndexPoly& z, const std::vector<long double>& args,
                                 ResidualPolicy policy) {
  const std::size_t n = z.truncation();
  auto arg = [&](std::size_t i) { return i >= 1 && i <= args.size() ? args[i - 1] : 0.0L; };
  for (long double a : args) {
    if (a < 0) throw PreconditionError("cycle index arguments must be non-negative");
  }
  CycleIndexEvaluation out;
  out.slices.assign(n + 1, 0.0L);
  if (z.is_factored()) {
    const auto& f = z.factors();
    std::vector<long double> acc(n + 1, 0.0L);
    acc[0] = 1;
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto& fi = f[i];
      if (trivial_factor(fi)) continue;
      // Terms f_i[m] x^m placed at degree i*m.
      std::vector<long double> g(n + 1, 0.0L);
      long double x = arg(i), p = 1;
      for (std::size_t m = 0; m < fi.size() && m * i <= n; ++m) {
        if (sgn(fi[m]) != 0) g[m * i] = to_long_double(fi[m]) * p;
        p *= x;
      }
      std::vector<long double> next(n + 1, 0.0L);
      for (std::size_t a = 0; a <= n; ++a) {
        if (acc[a] == 0) continue;
        for (std::size_t b = 0; a + b <= n; b += i) next[a + b] += acc[a] * g[b];
      }
      acc.swap(next);
    }
    out.slices = acc;
  } else {
    for (const auto& [t, c] : z.terms()) {
      long double v = to_long_double(c);
      for (auto [i, m] : t.multiplicities()) v *= std::pow(arg(i), static_cast<long double>(m));
      out.slices[t.degree()] += v;
    }
  }
  std::size_t cmp = policy.compare_at == 0 ? n / 2 : std::min(policy.compare_at, n);
  for (std::size_t k = 0; k <= n; ++k) {
    out.value += out.slices[k];
    if (k > cmp) out.residual += out.slices[k];
  }
  return out;
}

}  // namespace gibbs
