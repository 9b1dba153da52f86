#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gibbs/kernels.hpp"

using namespace gibbs::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool close(double a, double b, double scale) { return std::fabs(a - b) <= 1e-12 * scale; }

}  // namespace

TEST_CASE("vector kernels match the scalar reference") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 257u, 1000u}) {
    auto a = random_vector(n, rng);
    auto b = random_vector(n, rng);
    double ref = scalar::dot(a.data(), b.data(), n);
    double scale = static_cast<double>(n) + 1;
    CHECK(close(avx2::dot(a.data(), b.data(), n), ref, scale));
    CHECK(close(neon::dot(a.data(), b.data(), n), ref, scale));

    if (n > 0) {
      for (std::size_t m : {std::size_t{0}, n / 2, n - 1}) {
        double r = scalar::reverse_dot(a.data(), b.data(), m);
        CHECK(close(avx2::reverse_dot(a.data(), b.data(), m), r, scale));
        CHECK(close(neon::reverse_dot(a.data(), b.data(), m), r, scale));
      }
    }

    auto y0 = random_vector(n, rng);
    auto y1 = y0, y2 = y0;
    scalar::axpy(0.75, a.data(), y0.data(), n);
    avx2::axpy(0.75, a.data(), y1.data(), n);
    neon::axpy(0.75, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(close(y1[i], y0[i], 1));
      CHECK(close(y2[i], y0[i], 1));
    }
  }
}

TEST_CASE("dispatcher honours overrides and falls back to scalar") {
  Isa saved = active_isa();
  CHECK(set_active_isa(Isa::kScalar) == Isa::kScalar);
  CHECK(name(active_isa()) == "scalar");
  Isa got = set_active_isa(Isa::kAvx2);
  CHECK((got == Isa::kAvx2) == avx2::supported());
  got = set_active_isa(Isa::kNeon);
  CHECK((got == Isa::kNeon) == neon::supported());
  set_active_isa(saved);
}

TEST_CASE("convolve equals the naive product for every ISA") {
  std::mt19937_64 rng(3);
  auto a = random_vector(50, rng);
  auto b = random_vector(50, rng);
  std::vector<double> ref(50, 0.0);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; i + j < 50; ++j) ref[i + j] += a[i] * b[j];
  }
  Isa saved = active_isa();
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    set_active_isa(isa);
    std::vector<double> out(50);
    convolve(a, b, out);
    for (std::size_t n = 0; n < 50; ++n) CHECK(close(out[n], ref[n], 50));
  }
  set_active_isa(saved);
}
