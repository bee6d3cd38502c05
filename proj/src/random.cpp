#include "bans/random.hpp"

#include <cmath>

namespace bans::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = splitmix64(root);
  for (std::uint64_t label : path) s = splitmix64(s ^ splitmix64(label + kGolden));
  return s;
}

double keyed_uniform(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
  const std::uint64_t bits = splitmix64(derive_seed(root, path));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

bool Stream::bernoulli_logit(double log_odds) {
  if (log_odds == INFINITY) return true;
  if (log_odds == -INFINITY) return false;
  const double u = uniform();
  // P(1) = 1 / (1 + exp(-log_odds)), evaluated without overflow.
  if (log_odds >= 0.0) return u < 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return u < e / (1.0 + e);
}

}  // namespace bans::rng
