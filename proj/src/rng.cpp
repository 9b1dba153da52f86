#include "gibbs/rng.hpp"

namespace gibbs {

Rng stream_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

Rational uniform_unit(Rng& rng, unsigned bits) {
  BigInt k = 0;
  unsigned filled = 0;
  while (filled < bits) {
    unsigned take = std::min(64u, bits - filled);
    std::uint64_t word = rng();
    if (take < 64) word >>= (64 - take);
    BigInt w;
    mpz_import(w.get_mpz_t(), 1, 1, sizeof word, 0, 0, &word);
    k <<= take;
    k += w;
    filled += take;
  }
  Rational u(k);
  mpq_div_2exp(u.get_mpq_t(), u.get_mpq_t(), bits);
  return u;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace gibbs
