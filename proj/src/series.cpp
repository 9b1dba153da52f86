#include "gibbs/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

const Rational kZero(0);

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

VectorL least_squares(const MatrixL& a, const VectorL& b) {
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

TruncatedSeries::TruncatedSeries(std::size_t truncation) : coeffs_(truncation + 1, Rational(0)) {
  refresh();
}

TruncatedSeries::TruncatedSeries(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw PreconditionError("series needs at least one coefficient");
  for (auto& c : coeffs_) {
    c.canonicalize();
    if (sgn(c) < 0) throw PreconditionError("negative coefficient " + to_string(c));
  }
  refresh();
}

TruncatedSeries TruncatedSeries::one(std::size_t truncation) {
  return monomial(0, Rational(1), truncation);
}

TruncatedSeries TruncatedSeries::monomial(std::size_t degree, const Rational& c,
                                          std::size_t truncation) {
  std::vector<Rational> v(truncation + 1, Rational(0));
  if (degree <= truncation) v[degree] = c;
  return TruncatedSeries(std::move(v));
}

const Rational& TruncatedSeries::operator[](std::size_t n) const {
  return n < coeffs_.size() ? coeffs_[n] : kZero;
}

TruncatedSeries TruncatedSeries::truncated(std::size_t truncation) const {
  std::vector<Rational> v(truncation + 1, Rational(0));
  for (std::size_t n = 0; n <= truncation && n < coeffs_.size(); ++n) v[n] = coeffs_[n];
  return TruncatedSeries(std::move(v));
}

void TruncatedSeries::refresh() {
  std::size_t first = 0;
  std::size_t diff_gcd = 0;
  nonzero_ = 0;
  last_ = 0;
  for (std::size_t n = 0; n < coeffs_.size(); ++n) {
    if (sgn(coeffs_[n]) == 0) continue;
    if (nonzero_ == 0) {
      first = n;
    } else {
      diff_gcd = std::gcd(diff_gcd, n - first);
    }
    last_ = n;
    ++nonzero_;
  }
  if (nonzero_ == 0) {
    span_ = 1;
    residue_ = 0;
  } else if (nonzero_ == 1) {
    span_ = first == 0 ? 1 : first;
    residue_ = 0;
  } else {
    span_ = diff_gcd;
    residue_ = first % span_;
  }
}

nlohmann::json TruncatedSeries::to_json() const {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : coeffs_) coeffs.push_back(to_string(c));
  return {{"truncation", truncation()}, {"span", span_}, {"coeffs", coeffs}};
}

TruncatedSeries TruncatedSeries::from_json(const nlohmann::json& j) {
  try {
    std::size_t n = j.at("truncation").get<std::size_t>();
    const auto& arr = j.at("coeffs");
    if (arr.size() != n + 1) throw SpecError("coefficient count does not match truncation");
    std::vector<Rational> v;
    v.reserve(n + 1);
    for (const auto& c : arr) v.push_back(parse_rational(c.get<std::string>()));
    TruncatedSeries s(std::move(v));
    if (j.contains("span") && j.at("span").get<std::size_t>() != s.span()) {
      throw SpecError("declared span does not match coefficients");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed series json: ") + e.what());
  }
}

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b) {
  std::size_t n = std::min(a.truncation(), b.truncation());
  std::vector<Rational> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = a[i] + b[i];
  return TruncatedSeries(std::move(v));
}

TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  std::size_t n = std::min(a.truncation(), b.truncation());
  std::vector<Rational> v(n + 1, Rational(0));
  for (std::size_t i = 0; i <= n; ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; i + j <= n; ++j) {
      if (sgn(b[j]) == 0) continue;
      v[i + j] += a[i] * b[j];
    }
  }
  return TruncatedSeries(std::move(v));
}

TruncatedSeries scale(const TruncatedSeries& a, const Rational& c) {
  if (sgn(c) < 0) throw PreconditionError("negative scale factor");
  std::vector<Rational> v(a.coeffs());
  for (auto& x : v) x *= c;
  return TruncatedSeries(std::move(v));
}

TruncatedSeries substitute_power(const TruncatedSeries& g, std::size_t k) {
  if (k == 0) throw PreconditionError("substitute_power needs k >= 1");
  std::size_t n = g.truncation();
  std::vector<Rational> v(n + 1, Rational(0));
  for (std::size_t i = 0; i * k <= n; ++i) v[i * k] = g[i];
  return TruncatedSeries(std::move(v));
}

TruncatedSeries exp_series(const TruncatedSeries& a) {
  if (sgn(a[0]) != 0) {
    throw PreconditionError("exp_series needs a zero constant term");
  }
  std::size_t n = a.truncation();
  std::vector<Rational> ka(n + 1, Rational(0));
  for (std::size_t k = 1; k <= n; ++k) ka[k] = a[k] * static_cast<unsigned long>(k);
  std::vector<Rational> e(n + 1, Rational(0));
  e[0] = 1;
  for (std::size_t m = 1; m <= n; ++m) {
    Rational acc(0);
    for (std::size_t k = 1; k <= m; ++k) {
      if (sgn(ka[k]) != 0) acc += ka[k] * e[m - k];
    }
    e[m] = acc / static_cast<unsigned long>(m);
  }
  return TruncatedSeries(std::move(e));
}

std::vector<std::size_t> lattice_indices(const TruncatedSeries& g) {
  std::vector<std::size_t> out;
  for (std::size_t n = g.residue(); n <= g.truncation(); n += g.span()) out.push_back(n);
  return out;
}

std::size_t window_length(std::size_t lattice_points) {
  return std::min(lattice_points, std::max<std::size_t>(10, lattice_points / 10));
}

std::vector<long double> float_terms(const TruncatedSeries& g, long double x) {
  if (x < 0) throw PreconditionError("evaluation point must be non-negative");
  std::vector<long double> t(g.truncation() + 1, 0.0L);
  if (x == 0) {
    t[0] = to_long_double(g[0]);
    return t;
  }
  const long double lx = std::log2(x);
  for (std::size_t n = 0; n <= g.truncation(); ++n) {
    if (sgn(g[n]) == 0) continue;
    t[n] = std::exp2(log2_abs(g[n]) + static_cast<long double>(n) * lx);
  }
  return t;
}

namespace {

// Lattice indices from the first nonzero coefficient onwards.
std::vector<std::size_t> active_lattice(const TruncatedSeries& g) {
  std::vector<std::size_t> idx;
  for (std::size_t n : lattice_indices(g)) {
    if (idx.empty() && sgn(g[n]) == 0) continue;
    idx.push_back(n);
  }
  return idx;
}

struct PowerFit {
  long double a = 0, b = 0, c = 0, e = 0;
};

// log t_n = a + b log n + c/n + e/n^2, with n rescaled by n0 for conditioning.
PowerFit fit_power_law(const std::vector<std::size_t>& n, const std::vector<long double>& logt,
                       bool with_quadratic) {
  const auto rows = static_cast<Eigen::Index>(n.size());
  const Eigen::Index cols = with_quadratic ? 4 : 3;
  const long double n0 = static_cast<long double>(n.back());
  MatrixL a(rows, cols);
  VectorL rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    long double s = n0 / static_cast<long double>(n[i]);
    a(i, 0) = 1;
    a(i, 1) = -std::log(s);  // log n - log n0
    a(i, 2) = s;
    if (with_quadratic) a(i, 3) = s * s;
    rhs(i) = logt[i];
  }
  VectorL x = least_squares(a, rhs);
  PowerFit f;
  f.b = x(1);
  f.c = x(2) * n0;
  f.e = with_quadratic ? x(3) * n0 * n0 : 0;
  f.a = x(0) - f.b * std::log(n0);
  return f;
}

long double power_tail(const PowerFit& f, std::size_t last, std::size_t d) {
  auto term = [&](long double m) {
    return std::exp(f.a + f.b * std::log(m) + f.c / m + f.e / (m * m));
  };
  constexpr std::size_t kExplicit = 1u << 20;
  long double sum = 0;
  long double m = static_cast<long double>(last);
  const long double step = static_cast<long double>(d);
  for (std::size_t j = 1; j <= kExplicit; ++j) sum += term(m + step * static_cast<long double>(j));
  // Euler-Maclaurin remainder for sum_{j > J} f(M + j d), f ~ e^a m^b.
  const long double big_m = m + step * static_cast<long double>(kExplicit);
  const long double fm = term(big_m);
  const long double integral = -fm * big_m / (step * (f.b + 1));
  const long double derivative = f.b * fm / big_m;
  return sum + integral - fm / 2 - step * derivative / 12;
}

// sum_{j >= 1} exp(fit(M + j d)) q^{M + j d} for q < 1.
long double scaled_tail(const PowerFit& f, std::size_t last, std::size_t d, long double q) {
  if (q >= 1) return power_tail(f, last, d);
  const long double log_q = std::log(q);
  auto log_term = [&](long double m) {
    return f.a + f.b * std::log(m) + f.c / m + f.e / (m * m) + m * log_q;
  };
  constexpr std::size_t kMaxTerms = 1u << 22;
  const long double step = static_cast<long double>(d);
  long double sum = 0, prev = std::numeric_limits<long double>::infinity();
  for (std::size_t j = 1; j <= kMaxTerms; ++j) {
    const long double m = static_cast<long double>(last) + step * static_cast<long double>(j);
    const long double t = std::exp(log_term(m));
    sum += t;
    if (t < prev && t <= 1e-24L * sum) break;
    prev = t;
  }
  return sum;
}

// Tail from a power law fitted to g_n rho^n over the window, times q^n.
void radius_scaled(const TruncatedSeries& g, long double x, const RadiusEstimate& re,
                   const std::vector<std::size_t>& idx, const std::vector<std::size_t>& win,
                   Evaluation& out) {
  long double q = x / re.rho;
  // Points within the spread (with rounding slack) count as on the radius.
  if (std::fabs(q - 1) <= re.spread / re.rho * (1 + 1e-9L) + 1e-15L) q = 1;
  if (q > 1) {
    throw TailNotControlled("argument " + std::to_string(static_cast<double>(x)) +
                            " lies beyond the estimated radius " +
                            std::to_string(static_cast<double>(re.rho)));
  }
  const long double log_rho = std::log(re.rho);
  std::vector<std::size_t> pts;
  std::vector<long double> logu;
  for (std::size_t n : win) {
    if (sgn(g[n]) == 0 || n == 0) continue;
    pts.push_back(n);
    logu.push_back(log2_abs(g[n]) * std::log(2.0L) + static_cast<long double>(n) * log_rho);
  }
  if (pts.size() < 5) throw InsufficientData("scaled tail needs 5 nonzero window terms");
  PowerFit full = fit_power_law(pts, logu, true);
  PowerFit reduced = fit_power_law(pts, logu, false);
  if (q == 1 && (!(full.b < -1) || !(reduced.b < -1))) {
    throw TailNotControlled("fitted decay exponent " + std::to_string(static_cast<double>(full.b)) +
                            " is not below -1 on the radius");
  }
  out.ratio = q;
  out.tail = scaled_tail(full, idx.back(), g.span(), q);
  out.tail_error = std::fabs(out.tail - scaled_tail(reduced, idx.back(), g.span(), q));
  out.value = out.partial_sum + out.tail;
}

}  // namespace

Evaluation evaluate(const TruncatedSeries& g, long double x, TailModel model) {
  if (x < 0) throw PreconditionError("evaluation point must be non-negative");
  Evaluation out;
  std::vector<long double> t = float_terms(g, x);
  for (long double v : t) out.partial_sum += v;
  out.value = out.partial_sum;
  if (g.is_zero() || x == 0) return out;

  std::vector<std::size_t> idx = active_lattice(g);
  if (idx.size() < 2 || sgn(g[idx.back()]) == 0) return out;  // finite support
  const std::size_t w = window_length(idx.size());
  std::vector<std::size_t> win(idx.end() - static_cast<std::ptrdiff_t>(w), idx.end());

  if (model == TailModel::kGeometric) {
    // Majorant: the largest window ratio, or the ratio extrapolated in 1/n
    // when the ratios are still increasing towards their limit.
    long double r = 0;
    std::vector<long double> inv_n, ratios;
    for (std::size_t i = 0; i + 1 < win.size(); ++i) {
      long double lo = t[win[i]], hi = t[win[i + 1]];
      if (lo <= 0 || hi <= 0) continue;
      r = std::max(r, hi / lo);
      inv_n.push_back(1.0L / static_cast<long double>(win[i]));
      ratios.push_back(hi / lo);
    }
    if (ratios.empty()) return out;
    if (ratios.size() >= 3) {
      MatrixL a(static_cast<Eigen::Index>(ratios.size()), 2);
      VectorL rhs(static_cast<Eigen::Index>(ratios.size()));
      const long double scale = inv_n.front();
      for (std::size_t i = 0; i < ratios.size(); ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1;
        a(static_cast<Eigen::Index>(i), 1) = inv_n[i] / scale;
        rhs(static_cast<Eigen::Index>(i)) = ratios[i];
      }
      r = std::max(r, least_squares(a, rhs)(0));
    }
    out.ratio = r;
    if (!(r < 1)) {
      throw TailNotControlled("window term ratio " + std::to_string(static_cast<double>(r)) +
                              " is not below 1");
    }
    out.tail = t[win.back()] * r / (1 - r);
    out.tail_error = out.tail;
    out.value = out.partial_sum + out.tail;
    return out;
  }

  if (model == TailModel::kRadiusScaled) {
    radius_scaled(g, x, radius_estimate(g), idx, win, out);
    return out;
  }

  std::vector<std::size_t> pts;
  std::vector<long double> logt;
  for (std::size_t n : win) {
    if (t[n] <= 0 || n == 0) continue;
    pts.push_back(n);
    logt.push_back(std::log(t[n]));
  }
  if (pts.size() < 5) throw InsufficientData("power-law tail needs 5 nonzero window terms");
  PowerFit full = fit_power_law(pts, logt, true);
  PowerFit reduced = fit_power_law(pts, logt, false);
  out.ratio = full.b;
  if (!(full.b < -1) || !(reduced.b < -1)) {
    throw TailNotControlled("fitted decay exponent " + std::to_string(static_cast<double>(full.b)) +
                            " is not below -1");
  }
  out.tail = power_tail(full, idx.back(), g.span());
  out.tail_error = std::fabs(out.tail - power_tail(reduced, idx.back(), g.span()));
  out.value = out.partial_sum + out.tail;
  return out;
}

Evaluation evaluate_with_radius(const TruncatedSeries& g, long double x,
                                const RadiusEstimate& radius) {
  if (x < 0) throw PreconditionError("evaluation point must be non-negative");
  Evaluation out;
  for (long double v : float_terms(g, x)) out.partial_sum += v;
  out.value = out.partial_sum;
  if (g.is_zero() || x == 0) return out;
  std::vector<std::size_t> idx = active_lattice(g);
  if (idx.size() < 2 || sgn(g[idx.back()]) == 0) return out;
  const std::size_t w = window_length(idx.size());
  std::vector<std::size_t> win(idx.end() - static_cast<std::ptrdiff_t>(w), idx.end());
  radius_scaled(g, x, radius, idx, win, out);
  return out;
}

RadiusEstimate radius_estimate(const TruncatedSeries& g) {
  RadiusEstimate out;
  out.span = g.span();
  out.residue = g.residue();
  const std::size_t d = g.span();
  std::vector<std::size_t> idx = active_lattice(g);
  std::vector<std::size_t> n;
  std::vector<long double> q;
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    const Rational& a = g[idx[i]];
    const Rational& b = g[idx[i + 1]];
    if (sgn(a) == 0 || sgn(b) == 0) continue;
    long double l = (log2_abs(a) - log2_abs(b)) / static_cast<long double>(d);
    n.push_back(idx[i]);
    q.push_back(std::exp2(l));
  }
  if (n.size() < 3) throw InsufficientData("radius estimate needs at least 3 coefficient ratios");
  const std::size_t w = std::max<std::size_t>(3, window_length(idx.size()));
  const std::size_t take = std::min(w, n.size());
  const std::size_t from = n.size() - take;
  const long double n0 = static_cast<long double>(n.back());

  auto fit = [&](Eigen::Index cols) {
    MatrixL a(static_cast<Eigen::Index>(take), cols);
    VectorL rhs(static_cast<Eigen::Index>(take));
    for (std::size_t i = 0; i < take; ++i) {
      long double s = n0 / static_cast<long double>(n[from + i]);
      auto r = static_cast<Eigen::Index>(i);
      a(r, 0) = 1;
      if (cols > 1) a(r, 1) = s;
      if (cols > 2) a(r, 2) = s * s;
      rhs(r) = q[from + i];
    }
    return least_squares(a, rhs)(0);
  };
  long double rho3 = fit(3);
  long double rho2 = fit(2);
  out.rho = rho3;
  out.spread = std::fabs(rho3 - rho2);
  out.points = take;
  return out;
}

}  // namespace gibbs
