#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace snnforge {

// Seeded generator with hand-rolled draw transforms. std::mt19937_64 output
// is fully specified by the standard; the std::uniform_* distributions are
// not, so transforms are done here to keep runs replayable bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double unit_open_low() { return 1.0 - unit(); }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer in [0, n), n > 0. Multiply-shift keeps the mapping
  // portable; the residual bias at 64 bits is far below anything observable.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Fisher-Yates with a fixed draw order.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace snnforge
