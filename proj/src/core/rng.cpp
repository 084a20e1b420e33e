#include "core/rng.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace splitcv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

SeedSpec SeedSpec::child(std::uint64_t index) const {
  SeedSpec out = *this;
  out.stream_path.push_back(index);
  return out;
}

SeedSpec SeedSpec::child(std::initializer_list<std::uint64_t> indices) const {
  SeedSpec out = *this;
  out.stream_path.insert(out.stream_path.end(), indices.begin(), indices.end());
  return out;
}

std::uint64_t SeedSpec::key() const {
  std::uint64_t h = splitmix64(master_seed ^ 0x6A09E667F3BCC908ULL);
  for (std::size_t depth = 0; depth < stream_path.size(); ++depth)
    h = splitmix64(h ^ splitmix64(stream_path[depth] + 0xD1B54A32D192ED03ULL * (depth + 1)));
  return splitmix64(h ^ stream_path.size());
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                          std::array<std::uint32_t, 2> k) {
  constexpr std::uint64_t kM0 = 0xD2511F53, kM1 = 0xCD9E8D57;
  constexpr std::uint32_t kW0 = 0x9E3779B9, kW1 = 0xBB67AE85;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * c[0];
    const std::uint64_t p1 = kM1 * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

RandomStream::RandomStream(const SeedSpec& seed) : RandomStream(seed.key()) {}

RandomStream::RandomStream(std::uint64_t key)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

void RandomStream::refill() {
  block_ = philox4x32_10(counter_, key_);
  for (auto& word : counter_) {
    if (++word != 0) break;
  }
  used_ = 0;
}

std::uint64_t RandomStream::next_u64() {
  if (used_ > 2) refill();
  const std::uint64_t v = static_cast<std::uint64_t>(block_[used_]) |
                          (static_cast<std::uint64_t>(block_[used_ + 1]) << 32);
  used_ += 2;
  return v;
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Tensor gaussian_noise(const Shape& shape, double sigma, const SeedSpec& seed) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidParameter,
          "noise sigma must be positive");
  RandomStream rng(seed);
  std::vector<double> data(shape_size(shape));
  for (auto& v : data) v = sigma * rng.normal();
  return Tensor(shape, std::move(data));
}

}  // namespace splitcv
