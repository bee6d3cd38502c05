#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bans::rng {

// Stream derivation
// -----------------
// Every random stream in the library is identified by a root seed plus a path
// of 64-bit labels (domain tag, replicate, chain, layer, vertex, ...).  The
// stream seed is obtained by folding the path into the root with splitmix64:
//
//   s = splitmix64(root);  for each label x:  s = splitmix64(s ^ splitmix64(x + GOLDEN))
//
// where GOLDEN = 0x9E3779B97F4A7C15.  The result seeds a std::mt19937_64.
// Keyed uniforms (used by the graph generator) are the top 53 bits of one
// more splitmix64 round of the derived seed, scaled to [0, 1).

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

/// Deterministic uniform in [0, 1) addressed by (root, path); no state.
double keyed_uniform(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

// Domain tags keep streams for different purposes disjoint.
enum class Tag : std::uint64_t {
  GraphUndirected = 1,
  GraphDirected = 2,
  ParamB = 3,
  ParamK = 4,
  Data = 5,
  Replicate = 6,
  Chain = 7,
  Layer = 8,
  Vertex = 9,
  Pair = 10,
  Geweke = 11,
};

inline std::uint64_t tag(Tag t) noexcept { return static_cast<std::uint64_t>(t); }

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return normal_(engine_); }
  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  /// Bernoulli draw whose success probability is logistic(log_odds); robust
  /// to infinite log odds.
  bool bernoulli_logit(double log_odds);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Stream make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  return Stream(derive_seed(root, path));
}

}  // namespace bans::rng
