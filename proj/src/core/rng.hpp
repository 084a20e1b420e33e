#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "core/tensor.hpp"

namespace splitcv {

// Identifies one random stream: a master seed plus a path of indices,
// e.g. {k} for the k-th noise realization or {k, chain} for a sampler chain.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> stream_path;

  SeedSpec child(std::uint64_t index) const;
  SeedSpec child(std::initializer_list<std::uint64_t> indices) const;

  // 64-bit stream key hashed from (master_seed, stream_path).
  std::uint64_t key() const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// Philox4x32-10 counter-based generator. The key comes from a SeedSpec and
// the counter walks from zero, so a stream is a pure function of its spec.
class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed);
  explicit RandomStream(std::uint64_t key);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key);

// i.i.d. N(0, sigma^2) entries; sigma must be positive.
Tensor gaussian_noise(const Shape& shape, double sigma, const SeedSpec& seed);

}  // namespace splitcv
