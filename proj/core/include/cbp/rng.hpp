#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>

namespace cbp {

// Counter-based 64-bit generator: the SplitMix64 output function applied to
// a keyed Weyl counter. A stream is identified by its key; `child(k)`
// derives an independent stream by hashing (key, k), so sub-tasks and
// replicas can consume randomness in any order without coordination.
//
// Stream derivation used across the library (all relative to a caller's
// base stream):
//   replica r            base.child(r)
//   out-degree draws     replica.child(0)
//   lifted-run growth    replica.child(1)
//   root selection       replica.child(2)
//   coupling             replica.child(3), which derives
//     miscouple regrowth   .child(8).child(vertex id)
//     dummy marks/subtrees .child(9).child(node id)
//     continued evolution  .child(10).child(root vertex)
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed + kGamma)) {}

  RngStream child(std::uint64_t k) const {
    return RngStream(mix(key_ ^ mix(k * kGamma2 + kGamma)), 0);
  }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

  // uniform on (0, 1]; never returns 0, so -log() is finite
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_exponential(double rate) {
    assert(rate > 0.0);
    return -std::log(next_unit()) / rate;
  }

  // uniform on {0, ..., n-1}, mask rejection (unbiased)
  std::uint64_t next_below(std::uint64_t n) {
    assert(n > 0);
    if (n == 1) return 0;
    const int lz = __builtin_clzll(n - 1);
    const std::uint64_t mask = ~0ull >> lz;
    for (;;) {
      const std::uint64_t v = next_u64() & mask;
      if (v < n) return v;
    }
  }

  // uniform on {lo, ..., hi}
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    assert(lo <= hi);
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  RngStream(std::uint64_t key, std::uint64_t ctr) : key_(key), ctr_(ctr) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
  static constexpr std::uint64_t kGamma2 = 0xbf58476d1ce4e5b9ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace cbp
