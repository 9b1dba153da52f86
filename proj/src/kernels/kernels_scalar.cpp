#include "gibbs/kernels.hpp"

namespace gibbs::kernels::scalar {

double dot(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += a[i] * b[i];
  return acc;
}

double reverse_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) acc += a[k] * b[n - k];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

}  // namespace gibbs::kernels::scalar
