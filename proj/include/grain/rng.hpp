#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace grain {

// All randomness in the toolkit flows through this wrapper so that results
// are reproducible bit-for-bit from a seed. The engine is std::mt19937_64,
// whose raw output sequence is pinned by the C++ standard; the distributions
// are implemented here because the standard library's distribution objects
// are not portable across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n); rejection sampling trims the top of
  // the engine's range. Throws std::invalid_argument when n is zero.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal deviate via Marsaglia's polar method. Generates pairs
  // internally and hands out the spare on the next call.
  double normal();

  // Fisher-Yates shuffle, consuming one uniform_below per step.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives the seed for an independent random stream from a master seed and a
// purpose tag: FNV-1a over the tag bytes, folded into the master seed and
// passed through the splitmix64 finalizer. Every consumer of randomness uses
// its own tag, so adding a stream never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace grain
