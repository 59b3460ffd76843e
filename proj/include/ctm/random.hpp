// Counter-based randomness.
//
// Every draw is a pure function of (seed, epoch, sample, class, clause,
// literal, purpose). No generator state is carried between draws, so the
// outcome of a decision does not depend on the order in which decisions are
// taken. The sparse learner and the dense reference rely on this to walk
// their automata in different orders and still agree bit for bit.

#pragma once

#include <cstdint>

namespace ctm {

enum class DrawPurpose : std::uint32_t {
  LiteralSample = 1,
  ClauseSelect = 2,
  NegativeClass = 3,
  TypeI = 4,
  Shuffle = 5,
};

/// Fields that identify one draw, minus the literal id.
struct DrawKey {
  std::uint32_t epoch = 0;
  std::uint32_t sample = 0;
  std::uint32_t class_id = 0;
  std::uint32_t clause = 0;
  DrawPurpose purpose = DrawPurpose::TypeI;
};

namespace detail {

// splitmix64 finaliser
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Draws sharing a key prefix; only the literal id varies.
class KeyedStream {
 public:
  explicit constexpr KeyedStream(std::uint64_t prefix) : prefix_(prefix) {}

  constexpr std::uint64_t bits(std::uint32_t literal) const {
    return detail::mix64(prefix_ ^ (static_cast<std::uint64_t>(literal) * 0xd6e8feb86659fd93ULL));
  }

  /// Uniform on [0, 1).
  constexpr double uniform(std::uint32_t literal) const { return detail::to_unit(bits(literal)); }

  constexpr bool bernoulli(std::uint32_t literal, double p) const {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform(literal) < p;
  }

 private:
  std::uint64_t prefix_;
};

class RandomSource {
 public:
  explicit constexpr RandomSource(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }

  constexpr KeyedStream stream(const DrawKey& key) const {
    std::uint64_t h = detail::mix64(seed_ ^ 0x2545f4914f6cdd1dULL);
    h = detail::mix64(h ^ ((static_cast<std::uint64_t>(key.epoch) << 32) | key.sample));
    h = detail::mix64(h ^ ((static_cast<std::uint64_t>(key.class_id) << 32) | key.clause));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(key.purpose));
    return KeyedStream(h);
  }

  constexpr double uniform(const DrawKey& key, std::uint32_t literal = 0) const {
    return stream(key).uniform(literal);
  }

  constexpr bool bernoulli(const DrawKey& key, std::uint32_t literal, double p) const {
    return stream(key).bernoulli(literal, p);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace ctm
