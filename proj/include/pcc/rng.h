#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace pcc {

// xoshiro256** (a member of the xorshift family), seeded through splitmix64.
// Every draw is defined bit for bit here, so streams are identical on every
// platform; nothing goes through <random> distributions, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one draw consumes two uniforms.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in [0, n). Unbiased (rejection sampling). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates, walking from the back.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

// Independent per-purpose seed: derive_seed(seed, "init", fold) etc.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose,
                          std::uint64_t index = 0);

}  // namespace pcc
