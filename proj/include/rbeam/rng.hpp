#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rbeam/types.hpp"

namespace rbeam::rng {

/// SplitMix64 step. Used to derive independent stream seeds from a master
/// seed so that parallel tasks stay deterministic regardless of scheduling.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `stream` of master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// mt19937_64 with distributions spelled out explicitly so that generated
/// sequences are identical across standard libraries and platforms.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller.
  double normal();

  /// Circularly symmetric complex normal, E|z|^2 = 1.
  Complex complex_normal();

  /// Uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound);

  /// `count` distinct indices drawn from [0, population), ascending order.
  std::vector<int> sample_without_replacement(int population, int count);

  RMatrix gaussian_matrix(int rows, int cols);
  CVector complex_gaussian_vector(int size);

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace rbeam::rng
