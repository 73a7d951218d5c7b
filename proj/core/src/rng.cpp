#include "motdual/rng.hpp"

#include "motdual/normal.hpp"

namespace motdual {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Seed sequence for std::mt19937_64::seed that feeds splitmix64 output.
struct SplitMixSeq {
  using result_type = std::uint32_t;
  std::uint64_t state;

  template <class It>
  void generate(It begin, It end) {
    for (auto it = begin; it != end; ++it) {
      *it = static_cast<std::uint32_t>(splitmix64(state) >> 32);
    }
  }
};

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t mix = seed;
  std::uint64_t a = splitmix64(mix);
  std::uint64_t s = stream ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t b = splitmix64(s);
  SplitMixSeq seq{a ^ (b * 0xFF51AFD7ED558CCDULL)};
  engine_.seed(seq);
}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::normal() { return gaussian_quantile(uniform()); }

}  // namespace motdual
