#pragma once

// Seeded random streams. A single 64-bit master seed is mixed with stream
// tags (scenario, psi kind, p, replicate, purpose) to derive independent
// substreams, so replicates can run in any order or in parallel and still
// produce identical draws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

namespace latreg {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Chain-hash a master seed with a list of tags.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t t : tags) h = mix64(h ^ t);
  return h;
}

// Purpose tags for derived streams.
enum class Stream : std::uint64_t {
  loadings = 1,
  psi = 2,
  noise = 3,
  cv_folds = 4,
  test_draw = 5,
  split = 6,
  calibration = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t scenario,
                                 std::uint64_t kind, std::uint64_t p,
                                 std::uint64_t rep, Stream purpose) {
  return derive_seed(master,
                     {scenario, kind, p, rep, static_cast<std::uint64_t>(purpose)});
}

// mt19937_64 with explicit output mappings. The engine's bit stream is fully
// specified by the standard and the mappings below avoid the
// implementation-defined std::*_distribution classes, so draws are
// reproducible across platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // standard normal, Marsaglia polar method
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  }

  // k distinct indices from [0, p), ascending (partial Fisher-Yates)
  std::vector<std::size_t> sample_without_replacement(std::size_t p,
                                                      std::size_t k) {
    if (k > p)
      throw std::invalid_argument("sample_without_replacement: k > p");
    std::vector<std::size_t> idx(p);
    for (std::size_t i = 0; i < p; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(p - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  // in-place Fisher-Yates shuffle
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace latreg
