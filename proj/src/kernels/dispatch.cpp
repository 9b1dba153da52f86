// Runtime selection between the scalar reference kernels and the vectorized
// variants. No intrinsics live in this file.

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "gibbs/kernels.hpp"

namespace gibbs::kernels {

namespace {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return avx2::supported();
    case Isa::kNeon:
      return neon::supported();
  }
  return false;
}

Isa probe() {
  if (const char* env = std::getenv("GIBBS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::kScalar;
  }
  if (avx2::supported()) return Isa::kAvx2;
  if (neon::supported()) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

Isa detected_isa() { return probe(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  Isa chosen = isa_available(isa) ? isa : Isa::kScalar;
  active().store(chosen, std::memory_order_relaxed);
  return chosen;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  switch (active_isa()) {
    case Isa::kAvx2:
      return avx2::dot(a.data(), b.data(), a.size());
    case Isa::kNeon:
      return neon::dot(a.data(), b.data(), a.size());
    case Isa::kScalar:
      break;
  }
  return scalar::dot(a.data(), b.data(), a.size());
}

double reverse_dot(std::span<const double> a, std::span<const double> b, std::size_t n) {
  assert(n < a.size() && n < b.size());
  switch (active_isa()) {
    case Isa::kAvx2:
      return avx2::reverse_dot(a.data(), b.data(), n);
    case Isa::kNeon:
      return neon::reverse_dot(a.data(), b.data(), n);
    case Isa::kScalar:
      break;
  }
  return scalar::reverse_dot(a.data(), b.data(), n);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  switch (active_isa()) {
    case Isa::kAvx2:
      return avx2::axpy(alpha, x.data(), y.data(), x.size());
    case Isa::kNeon:
      return neon::axpy(alpha, x.data(), y.data(), x.size());
    case Isa::kScalar:
      break;
  }
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t len = std::min({a.size(), b.size(), out.size()});
  for (std::size_t n = 0; n < len; ++n) out[n] = reverse_dot(a, b, n);
  for (std::size_t n = len; n < out.size(); ++n) out[n] = 0.0;
}

}  // namespace gibbs::kernels
