#pragma once

// Reference implementations used as test oracles. Written from the
// definitions, sharing no code with the library.

#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "core/error.hpp"
#include "core/tensor.hpp"

namespace testing {

using splitcv::Shape;
using splitcv::Tensor;

// Hand-rolled generator for property tests, independent of the library RNG.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng);
  }
  Tensor tensor(const Shape& shape, double scale = 1.0) {
    std::vector<double> v(splitcv::shape_size(shape));
    for (auto& x : v) x = scale * normal();
    return Tensor(shape, std::move(v));
  }
  Shape image_shape(std::size_t lo = 3, std::size_t hi = 12) { return {index(lo, hi), index(lo, hi)}; }
};

inline std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

// y[i,j] = sum_{a,b} k[a,b] x[i - (a - h), j - (b - h)] with periodic indices.
inline Tensor circular_convolve_direct(const Tensor& x, const Tensor& k) {
  const std::size_t H = x.shape()[0], W = x.shape()[1];
  const std::size_t S = k.shape()[0], h = S / 2;
  std::vector<double> y(H * W, 0.0);
  for (std::size_t i = 0; i < H; ++i)
    for (std::size_t j = 0; j < W; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < S; ++a)
        for (std::size_t b = 0; b < S; ++b) {
          const long di = static_cast<long>(a) - static_cast<long>(h);
          const long dj = static_cast<long>(b) - static_cast<long>(h);
          acc += k[a * S + b] * x[wrap(static_cast<long>(i) - di, H) * W + wrap(static_cast<long>(j) - dj, W)];
        }
      y[i * W + j] = acc;
    }
  return Tensor({H, W}, std::move(y));
}

// Unitary 2-D DFT by the O(n^2) definition.
inline std::vector<std::complex<double>> naive_dft2(const std::vector<std::complex<double>>& x, std::size_t H,
                                                   std::size_t W, int sign = -1) {
  std::vector<std::complex<double>> out(H * W);
  const double scale = 1.0 / std::sqrt(static_cast<double>(H * W));
  for (std::size_t u = 0; u < H; ++u)
    for (std::size_t v = 0; v < W; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          const double ph = 2.0 * M_PI *
                            (static_cast<double>(u * i) / static_cast<double>(H) +
                             static_cast<double>(v * j) / static_cast<double>(W));
          acc += x[i * W + j] * std::polar(1.0, sign * ph);
        }
      out[u * W + v] = acc * scale;
    }
  return out;
}

inline Tensor central_difference_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                      double h = 1e-6) {
  std::vector<double> g(x.size());
  std::vector<double> v = x.to_vector();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + h;
    const double fp = f(Tensor(x.shape(), v));
    v[i] = orig - h;
    const double fm = f(Tensor(x.shape(), v));
    v[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return Tensor(x.shape(), std::move(g));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double log_normal_pdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) - (x - mean) * (x - mean) / (2.0 * var);
}

// Composite trapezoid rule of f over [a, b] with n nodes.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n - 1);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i + 1 < n; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

struct Moments {
  double mean = 0.0, var = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ma = moments(a), mb = moments(b);
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size() - 1);
  return c / std::sqrt(ma.var * mb.var);
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("splitcv_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing

#define CHECK_THROWS_KIND(expr, expected_kind)                        \
  do {                                                                \
    bool thrown_ = false;                                             \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const splitcv::Error& e_) {                              \
      thrown_ = true;                                                 \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());         \
    }                                                                 \
    CHECK_MESSAGE(thrown_, "expected splitcv::Error from " #expr);    \
  } while (0)
