#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stc {

// Seed for a named, indexed substream of a root seed. Adding a new stream name
// never perturbs the values drawn from existing ones.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

// Thin wrapper over mt19937_64 with portable derived distributions; the
// standard <random> distributions are implementation-defined and would make
// reports differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stc
