#pragma once

// Audit hook for dense matrix materialization. Code paths that allocate a
// dense square matrix report the dimension here; tests install a cap to
// verify that large-p runs never build a dense p x p object.

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace latreg::audit {

inline std::atomic<std::int64_t>& largest_dense_dim() {
  static std::atomic<std::int64_t> v{0};
  return v;
}

inline std::atomic<std::int64_t>& dense_dim_cap() {
  static std::atomic<std::int64_t> v{0};  // 0 = no cap
  return v;
}

inline void reset() { largest_dense_dim().store(0); }

inline void set_cap(std::int64_t cap) { dense_dim_cap().store(cap); }

// Called before allocating an r x c dense block.
inline void note_dense(std::int64_t r, std::int64_t c) {
  const std::int64_t d = r > c ? r : c;
  std::int64_t cur = largest_dense_dim().load();
  while (d > cur && !largest_dense_dim().compare_exchange_weak(cur, d)) {
  }
  const std::int64_t cap = dense_dim_cap().load();
  if (cap > 0 && d > cap)
    throw std::runtime_error("dense allocation audit: " + std::to_string(r) +
                             "x" + std::to_string(c) + " exceeds cap " +
                             std::to_string(cap));
}

}  // namespace latreg::audit
