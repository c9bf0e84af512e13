#include "ppapep/random.hpp"

#include <cmath>
#include <numbers>

namespace ppapep {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Xoshiro256::uniform_open_closed() noexcept {
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double Xoshiro256::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

std::uint64_t Xoshiro256::uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept {
  const std::uint64_t range = hi - lo;
  if (range == std::numeric_limits<std::uint64_t>::max()) return (*this)();
  const std::uint64_t span = range + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % span);
  std::uint64_t draw = 0;
  do {
    draw = (*this)();
  } while (draw >= limit);
  return lo + draw % span;
}

double Xoshiro256::normal() noexcept {
  const double u1 = uniform_open_closed();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

StepSchedule random_schedule(Xoshiro256& rng, std::size_t n) {
  std::vector<double> alphas(n);
  for (auto& a : alphas) a = rng.uniform_open_closed();
  return StepSchedule(std::move(alphas));
}

Vector random_normal_vector(Xoshiro256& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Matrix random_spd_matrix(Xoshiro256& rng, Eigen::Index n, double shift) {
  Matrix q(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.normal();
  Matrix b = q * q.transpose();
  b.diagonal().array() += shift;
  return symmetrized(b);
}

}  // namespace ppapep
