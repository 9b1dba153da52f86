#include "gibbs/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define GIBBS_X86 1
#else
#define GIBBS_X86 0
#endif

namespace gibbs::kernels::avx2 {

#if GIBBS_X86

bool supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) acc += a[i] * b[i];
  return acc;
}

__attribute__((target("avx2,fma"))) double reverse_dot(const double* a, const double* b,
                                                       std::size_t n) {
  // a[k] pairs with b[n-k]; load four b values ending at n-k and reverse them.
  const std::size_t len = n + 1;
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d bv = _mm256_loadu_pd(b + (n - k - 3));
    bv = _mm256_permute4x64_pd(bv, 0x1B);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), bv, acc);
  }
  double sum = hsum(acc);
  for (; k < len; ++k) sum += a[k] * b[n - k];
  return sum;
}

__attribute__((target("avx2,fma"))) void axpy(double alpha, const double* x, double* y,
                                              std::size_t len) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
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

}  // namespace gibbs::kernels::avx2
