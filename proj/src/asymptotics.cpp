#include "gibbs/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "gibbs/error.hpp"
#include "gibbs/kernels.hpp"

namespace gibbs {

namespace {

constexpr std::size_t kMinLatticePoints = 20;
constexpr long double kDivergenceResidual = 1e-6L;
constexpr long double kInf = std::numeric_limits<long double>::infinity();

nlohmann::json track_json(const Track& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [n, v] : t) out.push_back({n, static_cast<double>(v)});
  return out;
}

double num(long double v) { return static_cast<double>(v); }

// exp2 of a log2 difference keeps huge coefficients in range.
long double quotient(const Rational& a, const Rational& b) {
  return std::exp2(log2_abs(a) - log2_abs(b));
}

}  // namespace

long double window_deviation(const Track& track, long double target, std::size_t end) {
  if (!std::isfinite(static_cast<double>(target)) || target == 0) return kInf;
  std::size_t count = 0;
  while (count < track.size() && track[count].first <= end) ++count;
  if (count == 0) return kInf;
  const std::size_t w = window_length(count);
  long double worst = 0;
  for (std::size_t i = count - w; i < count; ++i) {
    worst = std::max(worst, std::fabs(track[i].second / target - 1));
  }
  return worst;
}

nlohmann::json SubexpReport::to_json() const {
  return {{"truncation", truncation},
          {"span", radius.span},
          {"rho", num(radius.rho)},
          {"rho_spread", num(radius.spread)},
          {"g_at_rho", num(g_at_rho)},
          {"g_at_rho_error", num(g_at_rho_error)},
          {"ratio_deviation", num(ratio_deviation)},
          {"convolution_deviation", num(convolution_deviation)},
          {"verdict_hint", verdict_hint},
          {"ratio_track", track_json(ratio_track)},
          {"convolution_track", track_json(convolution_track)}};
}

SubexpReport diagnose_subexponential(const TruncatedSeries& g) {
  std::vector<std::size_t> idx;
  for (std::size_t n : lattice_indices(g)) {
    if (sgn(g[n]) != 0) idx.push_back(n);
  }
  if (idx.size() < kMinLatticePoints) {
    throw InsufficientData("need " + std::to_string(kMinLatticePoints) +
                           " nonzero lattice coefficients, have " + std::to_string(idx.size()));
  }
  SubexpReport rep;
  rep.truncation = g.truncation();
  rep.radius = radius_estimate(g);
  const std::size_t d = rep.radius.span;
  const long double rho = rep.radius.rho;

  for (std::size_t n : idx) {
    if (n + d <= g.truncation() && sgn(g[n + d]) != 0) {
      rep.ratio_track.emplace_back(n, quotient(g[n], g[n + d]));
    }
  }
  if (g.residue() == 0) {
    const std::vector<long double> t = float_terms(g, rho);
    const std::vector<double> td(t.begin(), t.end());
    for (std::size_t n : idx) {
      rep.convolution_track.emplace_back(n, kernels::reverse_dot(td, td, n) / t[n]);
    }
  }

  try {
    Evaluation ev = evaluate(g, rho, TailModel::kRadiusScaled);
    rep.g_at_rho = ev.value;
    rep.g_at_rho_error = ev.tail_error;
  } catch (const TailNotControlled&) {
    rep.g_at_rho = kInf;
  }

  rep.ratio_deviation =
      window_deviation(rep.ratio_track, std::pow(rho, static_cast<long double>(d)), g.truncation());
  rep.convolution_deviation =
      window_deviation(rep.convolution_track, 2 * rep.g_at_rho, g.truncation());

  if (!std::isfinite(static_cast<double>(rep.g_at_rho))) {
    rep.verdict_hint =
        "g(rho) does not appear finite; the convolution condition cannot hold (hint, not a proof)";
  } else if (rep.convolution_track.empty()) {
    rep.verdict_hint = "coefficients live on a nonzero residue class; convolution track skipped";
  } else {
    rep.verdict_hint = "last-window deviations: ratio " + std::to_string(num(rep.ratio_deviation)) +
                       ", convolution " + std::to_string(num(rep.convolution_deviation)) +
                       " (a truncation cannot certify membership)";
  }
  return rep;
}

nlohmann::json ClosureReport::to_json() const {
  return {{"g_at_rho", num(g_at_rho)},
          {"target", num(target)},
          {"deviation", num(deviation)},
          {"ratio_track", track_json(ratio_track)}};
}

ClosureReport check_closure_under_composition(const TruncatedSeries& f, const TruncatedSeries& g) {
  if (sgn(g[0]) != 0) throw PreconditionError("the inner series must have no constant term");
  const RadiusEstimate re = radius_estimate(g);
  const std::size_t n_max = g.truncation();
  const std::vector<long double> u = float_terms(g, re.rho);

  // Horner on u(z) = g(rho z): h = f(u), all coefficients of moderate size.
  const std::vector<double> ud(u.begin(), u.end());
  std::vector<double> h(n_max + 1, 0.0), next(n_max + 1);
  const std::size_t k_max = f.is_zero() ? 0 : f.last_nonzero();
  for (std::size_t k = k_max + 1; k-- > 0;) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n_max; ++i) {
      if (h[i] == 0) continue;
      // next[i + j] += h[i] u[j] for j >= 1.
      kernels::axpy(h[i], std::span<const double>(ud).subspan(1, n_max - i),
                    std::span<double>(next).subspan(i + 1, n_max - i));
    }
    next[0] += k <= f.truncation() ? static_cast<double>(to_long_double(f[k])) : 0.0;
    h.swap(next);
  }

  ClosureReport rep;
  for (std::size_t n : lattice_indices(g)) {
    if (ud[n] > 0) rep.ratio_track.emplace_back(n, h[n] / ud[n]);
  }
  rep.g_at_rho = evaluate(g, re.rho, TailModel::kRadiusScaled).value;
  std::vector<Rational> fd(std::max<std::size_t>(f.truncation(), 1), Rational(0));
  for (std::size_t k = 1; k <= f.truncation(); ++k) fd[k - 1] = f[k] * static_cast<unsigned long>(k);
  rep.target = evaluate(TruncatedSeries(fd), rep.g_at_rho).value;
  rep.deviation = window_deviation(rep.ratio_track, rep.target, n_max);
  return rep;
}

nlohmann::json RatioReport::to_json() const {
  return {{"truncation", truncation},
          {"rho", num(rho)},
          {"rho_spread", num(spread)},
          {"constant", num(constant)},
          {"constant_residual", num(constant_residual)},
          {"constant_from_series", num(constant_from_series)},
          {"constant_agreement", num(constant_agreement)},
          {"deviation", num(deviation)},
          {"deviation_half", num(deviation_half)},
          {"ratio_track", track_json(ratio_track)}};
}

RatioReport coefficient_ratio_experiment(const GibbsModel& model) {
  if (!std::isfinite(static_cast<double>(model.rho()))) {
    throw InnerNotSubexponential("the inner series has no finite radius estimate");
  }
  RatioReport rep;
  rep.truncation = model.truncation();
  rep.rho = model.rho();
  rep.spread = model.radius().spread;
  const TruncatedSeries& g = model.inner_series();
  const TruncatedSeries& c = model.composite_series();
  for (std::size_t n : lattice_indices(g)) {
    if (sgn(g[n]) != 0 && sgn(c[n]) != 0) rep.ratio_track.emplace_back(n, quotient(c[n], g[n]));
  }
  CycleIndexEvaluation ev = evaluate_at(derivative_z1(model.outer_cycle_index()),
                                        model.inner_argument_vector(rep.rho));
  rep.constant = ev.value;
  rep.constant_residual = ev.residual;
  try {
    rep.constant_from_series = model.series_evaluation(model.derived_series(), rep.rho).value;
    rep.constant_agreement = std::fabs(rep.constant_from_series / rep.constant - 1);
  } catch (const TailNotControlled&) {
    rep.constant_from_series = kInf;
    rep.constant_agreement = kInf;
  }
  rep.deviation = window_deviation(rep.ratio_track, rep.constant, rep.truncation);
  rep.deviation_half = window_deviation(rep.ratio_track, rep.constant, rep.truncation / 2);
  return rep;
}

nlohmann::json ProbeReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"epsilon", num(r.epsilon)},
                   {"value", num(r.value)},
                   {"residual", num(r.residual)},
                   {"diverging", r.diverging}});
  }
  return out;
}

ProbeReport outer_margin_probe(const GibbsModel& model, const std::vector<long double>& epsilons) {
  ProbeReport rep;
  const CycleIndexPoly& zf = model.outer_cycle_index();
  const long double rho = model.rho();
  for (long double eps : epsilons) {
    ProbeRow row;
    row.epsilon = eps;
    std::vector<long double> args(zf.truncation(), 0.0L);
    try {
      if (!std::isfinite(static_cast<double>(rho))) {
        throw TailNotControlled("no radius to shift");
      }
      for (std::size_t i = 1; i <= args.size(); ++i) {
        args[i - 1] = i == 1 ? model.inner_value(1, rho) + eps : model.inner_value(i, rho + eps);
        if (args[i - 1] == 0) break;
      }
      CycleIndexEvaluation ev = evaluate_at(zf, args);
      row.value = ev.value;
      row.residual = ev.residual;
      row.diverging = !std::isfinite(static_cast<double>(ev.value)) ||
                      !(ev.residual <= kDivergenceResidual * ev.value);
    } catch (const TailNotControlled&) {
      row.value = kInf;
      row.residual = kInf;
      row.diverging = true;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gibbs
