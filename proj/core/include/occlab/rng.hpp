#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace occlab {

// Identifies one independent random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  // Stream for a sub-task (e.g. path k of this sample).
  SeedSpec child(std::uint64_t k) const;
  bool operator==(const SeedSpec&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

// Philox4x32-10 keyed by the master seed; the stream id occupies the upper
// half of the counter, the block index the lower half.
class Philox {
public:
  using result_type = std::uint64_t;

  explicit Philox(SeedSpec seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on (0, 1).
  double uniform();

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> out_{};
  int pos_ = 4;
};

// Gaussian source used by the samplers.
class Rng {
public:
  explicit Rng(SeedSpec seed) : eng_(seed) {}
  double normal() { return nd_(eng_); }
  double uniform() { return eng_.uniform(); }
  std::uint64_t poisson(double mean);
  Philox& engine() { return eng_; }

private:
  Philox eng_;
  std::normal_distribution<double> nd_;
};

}  // namespace occlab
