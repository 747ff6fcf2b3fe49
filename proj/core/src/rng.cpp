#include "occlab/rng.hpp"

namespace occlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t k) const {
  return {master_seed, splitmix64(stream_id ^ splitmix64(k + 0x632BE59BD9B4E019ULL))};
}

Philox::Philox(SeedSpec seed)
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      ctr_{0, 0, static_cast<std::uint32_t>(seed.stream_id),
           static_cast<std::uint32_t>(seed.stream_id >> 32)} {}

void Philox::refill() {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  auto c = ctr_;
  auto k = key_;
  for (int r = 0; r < 10; ++r) {
    std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += W0;
    k[1] += W1;
  }
  out_ = c;
  pos_ = 0;
  if (++ctr_[0] == 0) ++ctr_[1];
}

Philox::result_type Philox::operator()() {
  if (pos_ >= 4) refill();
  std::uint64_t v = (static_cast<std::uint64_t>(out_[pos_]) << 32) | out_[pos_ + 1];
  pos_ += 2;
  return v;
}

double Philox::uniform() {
  // 53 random bits, offset by half an ulp so 0 is never returned.
  return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> pd(mean);
  return pd(eng_);
}

}  // namespace occlab
