#include "lsjm/rng.hpp"

#include <cmath>
#include <numbers>

namespace lsjm {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t x, r;
  do {
    x = gen_();
    r = x % n;
  } while (x - r > std::uint64_t(-1) - (n - 1));
  return r;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(base ^ fnv1a64_str(tag));
  return splitmix64(h ^ splitmix64(index + 1));
}

}  // namespace lsjm
