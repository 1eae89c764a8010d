#pragma once

#include <cmath>
#include <cstdint>

namespace sconv {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based splittable generator. Every output is a pure function of
/// (seed, stream, counter), so ensembles indexed by stream are reproducible
/// and independent of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::mix64(seed ^ detail::mix64(stream + 0x517cc1b727220a95ull))) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ull); }

  /// Uniform on (0,1), never 0 or 1.
  double next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  double next_exponential(double rate) { return -std::log(next_uniform()) / rate; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives the per-path seed for path `index` of an ensemble keyed by
/// `master`. Paths may be simulated in any order or on any worker.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::mix64(master + detail::mix64(index + 1));
}

}  // namespace sconv
