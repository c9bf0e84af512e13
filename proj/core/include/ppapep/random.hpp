#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "ppapep/linalg.hpp"
#include "ppapep/schedule.hpp"

namespace ppapep {

/// xoshiro256** (Blackman & Vigna), state seeded through splitmix64.
/// Output is identical across platforms for a given seed. Satisfies
/// UniformRandomBitGenerator, but the helpers below avoid std::
/// distributions because their output is implementation-defined.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;
  /// Uniform on (0, 1].
  double uniform_open_closed() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [lo, hi] (inclusive), rejection-sampled.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// N step lengths drawn i.i.d. uniform on (0, 1].
StepSchedule random_schedule(Xoshiro256& rng, std::size_t n);

Vector random_normal_vector(Xoshiro256& rng, Eigen::Index n);
/// Q Q^T + shift I with Q entries standard normal.
Matrix random_spd_matrix(Xoshiro256& rng, Eigen::Index n, double shift);

}  // namespace ppapep
