#include "gibbs/kernels.hpp"

#if defined(__aarch64__) || defined(_M_ARM64)
#include <arm_neon.h>
#define GIBBS_NEON 1
#else
#define GIBBS_NEON 0
#endif

namespace gibbs::kernels::neon {

#if GIBBS_NEON

// Advanced SIMD is mandatory on AArch64.
bool supported() { return true; }

double dot(const double* a, const double* b, std::size_t len) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < len; ++i) acc += a[i] * b[i];
  return acc;
}

double reverse_dot(const double* a, const double* b, std::size_t n) {
  const std::size_t len = n + 1;
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= len; k += 2) {
    float64x2_t bv = vld1q_f64(b + (n - k - 1));
    bv = vextq_f64(bv, bv, 1);
    acc = vfmaq_f64(acc, vld1q_f64(a + k), bv);
  }
  double sum = vaddvq_f64(acc);
  for (; k < len; ++k) sum += a[k] * b[n - k];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t len) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  }
  for (; i < len; ++i) y[i] += alpha * x[i];
}

#else

bool supported() { return false; }
double dot(const double* a, const double* b, std::size_t len) { return scalar::dot(a, b, len); }
double reverse_dot(const double* a, const double* b, std::size_t n) {
  return scalar::reverse_dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t len) {
  scalar::axpy(alpha, x, y, len);
}

#endif

}  // namespace gibbs::kernels::neon
