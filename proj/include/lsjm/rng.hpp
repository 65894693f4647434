#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lsjm {

// Seeded generator with a fully pinned output sequence. std::normal_distribution and
// std::shuffle are implementation-defined, so Box-Muller and Fisher-Yates are spelled
// out here; identical seeds give identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second draw of each pair.
  double normal();

  // Uniform integer on [0, n), unbiased by rejection.
  std::uint64_t uniform_below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent seed for a named sub-stream (restart r, fold f, ...).
// All randomness in a run flows from one user-visible seed through these.
std::uint64_t substream_seed(std::uint64_t base, std::string_view tag, std::uint64_t index);

}  // namespace lsjm
