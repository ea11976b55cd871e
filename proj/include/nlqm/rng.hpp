#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nlqm {

// All randomness in the toolkit flows through this wrapper: a seeded
// mt19937_64 with 53-bit uniforms on the open interval (0,1), so a fixed
// seed reproduces the same stream on every platform and thermal draws are
// strictly positive.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  int bit() { return uniform() < 0.5 ? 0 : 1; }

  // Independent substream seed for (master, stream), splitmix64 finalizer.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace nlqm
