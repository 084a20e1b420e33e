#include "core/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "core/error.hpp"

namespace splitcv {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const Shape& shape, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> dims(shape.begin(), shape.end());
    const auto n = shape_size(shape);
    auto* scratch_in = fftw_alloc_complex(n);
    auto* scratch_out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch_in, scratch_out,
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch_in);
    fftw_free(scratch_out);
    if (plan == nullptr) fail(ErrorKind::Unsupported, "FFTW could not plan shape " + shape_to_string(shape));
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<Shape, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

std::vector<Complex> transform(std::span<const Complex> in, const Shape& shape, int sign) {
  const auto n = shape_size(shape);
  require(in.size() == n, ErrorKind::Dimension, "dft: input length does not match shape");
  fftw_plan plan = cache().get(shape, sign);
  std::vector<Complex> buffer(in.begin(), in.end());
  std::vector<Complex> out(n);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buffer.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace

std::vector<Complex> dft(std::span<const Complex> in, const Shape& shape) {
  return transform(in, shape, FFTW_FORWARD);
}

std::vector<Complex> idft(std::span<const Complex> in, const Shape& shape) {
  return transform(in, shape, FFTW_BACKWARD);
}

std::vector<Complex> dft_real(std::span<const double> in, const Shape& shape) {
  std::vector<Complex> c(in.begin(), in.end());
  return dft(c, shape);
}

std::vector<double> idft_real(std::span<const Complex> in, const Shape& shape, double* max_imag) {
  const auto c = idft(in, shape);
  std::vector<double> out(c.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = c[i].real();
    worst = std::max(worst, std::abs(c[i].imag()));
  }
  if (max_imag) *max_imag = worst;
  return out;
}

std::size_t mirrored_index(std::size_t index, const Shape& shape) {
  std::size_t out = 0;
  std::size_t stride = 1;
  for (std::size_t d = shape.size(); d-- > 0;) {
    const std::size_t k = (index / stride) % shape[d];
    out += ((shape[d] - k) % shape[d]) * stride;
    stride *= shape[d];
  }
  return out;
}

}  // namespace splitcv
