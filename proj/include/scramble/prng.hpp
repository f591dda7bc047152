#pragma once

#include <cstdint>

namespace scramble {

// Stateless splitmix-style key chain. Every stochastic input in the toolkit
// (disorder fields, ensemble angles, bootstrap draws) is a pure function of
// (master seed, purpose tag, indices), so records are reproducible bit for
// bit across platforms and independent of execution order.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Child key from (key, word); chains associate left, so
// stream_word(seed, a, b) == stream_word(stream_word(seed, a), b).
constexpr std::uint64_t stream_word(std::uint64_t key, std::uint64_t word) {
  return mix64(key + kGoldenGamma * (word + 1));
}
constexpr std::uint64_t stream_word(std::uint64_t key, std::uint64_t a,
                                    std::uint64_t b) {
  return stream_word(stream_word(key, a), b);
}
constexpr std::uint64_t stream_word(std::uint64_t key, std::uint64_t a,
                                    std::uint64_t b, std::uint64_t c) {
  return stream_word(stream_word(key, a, b), c);
}

// Top 53 bits of the key as a double in [0, 1).
constexpr double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Purpose tags keep independent draw streams under one master seed.
enum StreamTag : std::uint64_t {
  kStreamDisorder = 1,
  kStreamAngles = 2,
  kStreamState = 3,
};

}  // namespace scramble
