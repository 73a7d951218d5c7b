#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace motdual {

// Name recorded in every report that consumed random numbers.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64 (streams seeded by splitmix64)";

// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

// Seedable, splittable generator. Stream `k` of seed `s` is an independent
// mt19937_64 whose 312-word state is filled from splitmix64 started at a
// mix of (s, k), so per-path or per-sample streams can be drawn in any order
// or in parallel and still reproduce bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  // Standard normal by inversion of a uniform draw. Does not depend on the
  // standard library's distribution implementations, which vary by vendor.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace motdual
