#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/fft.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace splitcv {

enum class KernelFamily { Gaussian, Moffat, Laplace, Uniform };

// The tabulated Laplace profile reads exp(sigma(-|x| + |y|)), which grows
// along y. `Decaying` evaluates exp(-sigma(|x| + |y|)) and is the default.
enum class LaplaceVariant { Decaying, AsPrinted };

inline constexpr std::size_t kDefaultKernelSupport = 25;

struct BlurKernel {
  KernelFamily family = KernelFamily::Gaussian;
  std::vector<double> params;
  std::size_t support = 0;
  Tensor values;  // support x support, unit sum

  std::string label() const;
};

const char* to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

// Unnormalized family profile at integer offset (dx, dy) from the center.
double kernel_profile(KernelFamily family, std::span<const double> params, double dx, double dy,
                      LaplaceVariant variant = LaplaceVariant::Decaying);

// Gaussian(sigma), Moffat(sigma, mu), Laplace(sigma), Uniform(s).
BlurKernel make_kernel(KernelFamily family, std::span<const double> params,
                       std::size_t support = kDefaultKernelSupport,
                       LaplaceVariant variant = LaplaceVariant::Decaying);

struct ValidMask {
  std::size_t border = 0;

  // floor(largest support / 2)
  static ValidMask for_kernels(std::span<const BlurKernel> kernels);
};

Tensor valid_crop(const Tensor& x, const ValidMask& mask);

// Linear forward map with its adjoint. All kinds built here are diagonal
// under the unitary DFT of the input grid and expose that spectrum.
class LinearOperator {
 public:
  enum class Kind { Identity, Circulant, MaskedFourier };

  static LinearOperator identity(Shape shape);
  // Periodic convolution of an image with an odd-sized kernel centered at the origin.
  static LinearOperator circulant(const Tensor& kernel, Shape image_shape);
  // y = M F x on a 2-D grid. `mask` is 0/1 and must be symmetric under
  // k -> -k so that the real and imaginary channels carry a real signal.
  // Output shape is [2, H, W] (real part, imaginary part).
  static LinearOperator masked_fourier(const Tensor& mask);

  Kind kind() const noexcept { return kind_; }
  const Shape& input_shape() const noexcept { return in_shape_; }
  const Shape& output_shape() const noexcept { return out_shape_; }
  std::size_t input_size() const { return shape_size(in_shape_); }
  std::size_t output_size() const { return shape_size(out_shape_); }

  bool fourier_diagonal() const noexcept { return spectrum_.has_value(); }
  // Per-frequency gains d with A^T A = F* diag(|d|^2) F.
  const std::vector<Complex>& spectrum() const;
  // 0/1 weights over the output marking measured entries (masked Fourier only).
  const std::optional<Tensor>& output_support() const noexcept { return support_; }
  const std::optional<Tensor>& kernel() const noexcept { return kernel_; }

  Tensor apply(const Tensor& x) const;
  Tensor apply_adjoint(const Tensor& y) const;

  // max_i |d_i|^2; throws Unsupported when no spectrum is known.
  double spectral_norm_sq() const;

 private:
  LinearOperator() = default;

  Kind kind_ = Kind::Identity;
  Shape in_shape_;
  Shape out_shape_;
  std::optional<std::vector<Complex>> spectrum_;
  std::optional<Tensor> support_;
  std::optional<Tensor> kernel_;
};

// Single-coil Cartesian undersampling: keeps every row within the central
// band, then draws symmetric row pairs with a Gaussian density over the
// row frequency until round(H / R) rows are kept.
LinearOperator make_mri_mask(const Shape& shape, double acceleration, double center_fraction,
                             const SeedSpec& seed);

}  // namespace splitcv
