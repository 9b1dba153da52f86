#pragma once

// Floating point inner loops used by the numeric diagnostics. Every kernel has
// a scalar reference implementation and vectorized variants; the dispatcher
// picks the best variant supported by the running CPU.

#include <cstddef>
#include <span>
#include <string_view>

namespace gibbs::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view name(Isa isa);

/// Best ISA available on this machine (honours GIBBS_SIMD=scalar).
Isa detected_isa();

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Override the dispatcher, e.g. to pin scalar results. Requests for an ISA
/// the CPU lacks fall back to scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa);

/// sum_i a[i] * b[i]; spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// sum_{k=0}^{n} a[k] * b[n-k]: one coefficient of a truncated Cauchy product.
/// Requires n < a.size() and n < b.size().
double reverse_dot(std::span<const double> a, std::span<const double> b, std::size_t n);

/// y[i] += alpha * x[i].
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Truncated product of two float series; out.size() terms are produced.
void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out);

// Per-ISA entry points, exposed for the equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t len);
double reverse_dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t len);
}  // namespace scalar

namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t len);
double reverse_dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t len);
}  // namespace avx2

namespace neon {
bool supported();
double dot(const double* a, const double* b, std::size_t len);
double reverse_dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t len);
}  // namespace neon

}  // namespace gibbs::kernels
