#include "core/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/error.hpp"

namespace splitcv {

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Moffat: return "moffat";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::Uniform: return "uniform";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "moffat") return KernelFamily::Moffat;
  if (name == "laplace") return KernelFamily::Laplace;
  if (name == "uniform") return KernelFamily::Uniform;
  fail(ErrorKind::InvalidParameter, "unknown kernel family '" + name + "'");
}

std::string BlurKernel::label() const {
  std::ostringstream os;
  os << to_string(family) << '(';
  for (std::size_t i = 0; i < params.size(); ++i) os << (i ? "," : "") << params[i];
  os << ')';
  return os.str();
}

namespace {

std::size_t expected_params(KernelFamily family) {
  return family == KernelFamily::Moffat ? 2 : 1;
}

void check_params(KernelFamily family, std::span<const double> params) {
  require(params.size() == expected_params(family), ErrorKind::InvalidParameter,
          std::string(to_string(family)) + " kernel takes " +
              std::to_string(expected_params(family)) + " parameter(s)");
  for (double p : params)
    require(std::isfinite(p) && p > 0.0, ErrorKind::InvalidParameter,
            std::string(to_string(family)) + " kernel parameters must be positive");
  if (family == KernelFamily::Uniform)
    require(params[0] >= 1.0, ErrorKind::InvalidParameter, "uniform kernel half-width must be >= 1");
}

}  // namespace

double kernel_profile(KernelFamily family, std::span<const double> params, double dx, double dy,
                      LaplaceVariant variant) {
  check_params(family, params);
  const double r2 = dx * dx + dy * dy;
  switch (family) {
    case KernelFamily::Gaussian: {
      const double s = params[0];
      return std::exp(-r2 / (2.0 * s * s));
    }
    case KernelFamily::Moffat: {
      const double s = params[0], mu = params[1];
      return std::pow(s * s * r2 / mu + 1.0, -(mu / 2.0 + 1.0));
    }
    case KernelFamily::Laplace: {
      const double s = params[0];
      if (variant == LaplaceVariant::AsPrinted) return std::exp(s * (-std::abs(dx) + std::abs(dy)));
      return std::exp(-s * (std::abs(dx) + std::abs(dy)));
    }
    case KernelFamily::Uniform: {
      const double s = params[0];
      return (std::abs(dx) <= s && std::abs(dy) <= s) ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

BlurKernel make_kernel(KernelFamily family, std::span<const double> params, std::size_t support,
                       LaplaceVariant variant) {
  check_params(family, params);
  require(support % 2 == 1, ErrorKind::InvalidParameter, "kernel support must be odd");
  const auto half = static_cast<double>(support / 2);
  std::vector<double> values(support * support);
  for (std::size_t i = 0; i < support; ++i) {
    for (std::size_t j = 0; j < support; ++j) {
      // row index i is the vertical (y) offset, column j the horizontal (x) one
      values[i * support + j] =
          kernel_profile(family, params, static_cast<double>(j) - half, static_cast<double>(i) - half, variant);
    }
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  require(total > 0.0 && std::isfinite(total), ErrorKind::Numerical, "kernel has no mass on its support");
  for (auto& v : values) v /= total;
  BlurKernel k;
  k.family = family;
  k.params.assign(params.begin(), params.end());
  k.support = support;
  k.values = Tensor({support, support}, std::move(values));
  return k;
}

ValidMask ValidMask::for_kernels(std::span<const BlurKernel> kernels) {
  std::size_t largest = 0;
  for (const auto& k : kernels) largest = std::max(largest, k.support);
  return ValidMask{largest / 2};
}

Tensor valid_crop(const Tensor& x, const ValidMask& mask) {
  if (mask.border == 0) return x;
  const auto& shape = x.shape();
  Shape out_shape(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) {
    require(2 * mask.border < shape[d], ErrorKind::Dimension,
            "valid crop border " + std::to_string(mask.border) + " too large for " + shape_to_string(shape));
    out_shape[d] = shape[d] - 2 * mask.border;
  }
  std::vector<double> out;
  out.reserve(shape_size(out_shape));
  // iterate over output multi-indices in row-major order
  std::vector<std::size_t> idx(shape.size(), 0);
  std::vector<std::size_t> stride(shape.size(), 1);
  for (std::size_t d = shape.size() - 1; d-- > 0;) stride[d] = stride[d + 1] * shape[d + 1];
  const auto total = shape_size(out_shape);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) flat += (idx[d] + mask.border) * stride[d];
    out.push_back(x[flat]);
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  return Tensor(std::move(out_shape), std::move(out));
}

// ---- LinearOperator -------------------------------------------------------

LinearOperator LinearOperator::identity(Shape shape) {
  require(shape_size(shape) > 0, ErrorKind::Dimension, "identity operator needs a non-empty shape");
  LinearOperator op;
  op.kind_ = Kind::Identity;
  op.in_shape_ = shape;
  op.out_shape_ = std::move(shape);
  op.spectrum_ = std::vector<Complex>(op.input_size(), Complex(1.0, 0.0));
  return op;
}

LinearOperator LinearOperator::circulant(const Tensor& kernel, Shape image_shape) {
  require(kernel.ndim() == 2 && image_shape.size() == 2, ErrorKind::Dimension,
          "circulant operator needs a 2-D kernel and a 2-D image");
  const std::size_t kh = kernel.shape()[0], kw = kernel.shape()[1];
  require(kh % 2 == 1 && kw % 2 == 1, ErrorKind::InvalidParameter, "kernel sides must be odd");
  const std::size_t h = image_shape[0], w = image_shape[1];
  require(h > 0 && w > 0, ErrorKind::Dimension, "empty image shape");

  // zero-pad and shift so the kernel center sits at the origin (wrapping if larger)
  std::vector<Complex> padded(h * w, Complex(0.0, 0.0));
  const auto ch = static_cast<long>(kh / 2), cw = static_cast<long>(kw / 2);
  for (std::size_t i = 0; i < kh; ++i) {
    for (std::size_t j = 0; j < kw; ++j) {
      const long di = static_cast<long>(i) - ch, dj = static_cast<long>(j) - cw;
      const auto r = static_cast<std::size_t>(((di % static_cast<long>(h)) + static_cast<long>(h)) % static_cast<long>(h));
      const auto c = static_cast<std::size_t>(((dj % static_cast<long>(w)) + static_cast<long>(w)) % static_cast<long>(w));
      padded[r * w + c] += kernel[i * kw + j];
    }
  }
  auto spectrum = dft(padded, image_shape);
  const double root_n = std::sqrt(static_cast<double>(h * w));
  for (auto& d : spectrum) d *= root_n;

  LinearOperator op;
  op.kind_ = Kind::Circulant;
  op.in_shape_ = image_shape;
  op.out_shape_ = std::move(image_shape);
  op.spectrum_ = std::move(spectrum);
  op.kernel_ = kernel;
  return op;
}

LinearOperator LinearOperator::masked_fourier(const Tensor& mask) {
  require(mask.ndim() == 2, ErrorKind::Dimension, "Fourier mask must be 2-D");
  const auto& shape = mask.shape();
  std::vector<Complex> spectrum(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    require(mask[i] == 0.0 || mask[i] == 1.0, ErrorKind::InvalidParameter, "Fourier mask entries must be 0 or 1");
    require(mask[i] == mask[mirrored_index(i, shape)], ErrorKind::InvalidParameter,
            "Fourier mask must be symmetric under k -> -k");
    spectrum[i] = Complex(mask[i], 0.0);
  }
  std::vector<double> support(2 * mask.size());
  std::copy(mask.values().begin(), mask.values().end(), support.begin());
  std::copy(mask.values().begin(), mask.values().end(), support.begin() + static_cast<std::ptrdiff_t>(mask.size()));

  LinearOperator op;
  op.kind_ = Kind::MaskedFourier;
  op.in_shape_ = shape;
  op.out_shape_ = {2, shape[0], shape[1]};
  op.spectrum_ = std::move(spectrum);
  op.support_ = Tensor(op.out_shape_, std::move(support));
  return op;
}

const std::vector<Complex>& LinearOperator::spectrum() const {
  if (!spectrum_) fail(ErrorKind::Unsupported, "operator is not Fourier-diagonal");
  return *spectrum_;
}

Tensor LinearOperator::apply(const Tensor& x) const {
  require(x.shape() == in_shape_, ErrorKind::Dimension,
          "apply: expected input " + shape_to_string(in_shape_) + ", got " + shape_to_string(x.shape()));
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Circulant: {
      auto coeffs = dft_real(x.values(), in_shape_);
      for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= (*spectrum_)[i];
      return Tensor(out_shape_, idft_real(coeffs, in_shape_));
    }
    case Kind::MaskedFourier: {
      const auto coeffs = dft_real(x.values(), in_shape_);
      const auto n = coeffs.size();
      std::vector<double> out(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const Complex v = coeffs[i] * (*spectrum_)[i];
        out[i] = v.real();
        out[n + i] = v.imag();
      }
      return Tensor(out_shape_, std::move(out));
    }
  }
  return x;
}

Tensor LinearOperator::apply_adjoint(const Tensor& y) const {
  require(y.shape() == out_shape_, ErrorKind::Dimension,
          "apply_adjoint: expected input " + shape_to_string(out_shape_) + ", got " + shape_to_string(y.shape()));
  switch (kind_) {
    case Kind::Identity:
      return y;
    case Kind::Circulant: {
      auto coeffs = dft_real(y.values(), out_shape_);
      for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= std::conj((*spectrum_)[i]);
      return Tensor(in_shape_, idft_real(coeffs, in_shape_));
    }
    case Kind::MaskedFourier: {
      const auto n = input_size();
      std::vector<Complex> coeffs(n);
      for (std::size_t i = 0; i < n; ++i) coeffs[i] = std::conj((*spectrum_)[i]) * Complex(y[i], y[n + i]);
      return Tensor(in_shape_, idft_real(coeffs, in_shape_));
    }
  }
  return y;
}

double LinearOperator::spectral_norm_sq() const {
  const auto& d = spectrum();
  double best = 0.0;
  for (const auto& v : d) best = std::max(best, std::norm(v));
  return best;
}

// ---- MRI mask -------------------------------------------------------------

LinearOperator make_mri_mask(const Shape& shape, double acceleration, double center_fraction,
                             const SeedSpec& seed) {
  require(shape.size() == 2 && shape[0] > 0 && shape[1] > 0, ErrorKind::Dimension, "MRI mask needs a 2-D shape");
  require(std::isfinite(acceleration) && acceleration >= 1.0, ErrorKind::InvalidParameter,
          "acceleration R must be >= 1");
  require(center_fraction > 0.0 && center_fraction <= 1.0, ErrorKind::InvalidParameter,
          "center fraction must lie in (0, 1]");
  const std::size_t rows = shape[0], cols = shape[1];
  const auto target = static_cast<std::size_t>(std::lround(static_cast<double>(rows) / acceleration));

  // signed row frequency of FFT index k
  auto freq = [rows](std::size_t k) {
    return k <= rows / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(rows);
  };

  std::vector<char> keep(rows, 0);
  const auto center_rows = static_cast<std::size_t>(std::lround(center_fraction * static_cast<double>(rows)));
  std::size_t kept = 0;
  if (center_rows >= rows) {
    std::fill(keep.begin(), keep.end(), 1);
    kept = rows;
  } else {
    const long half = static_cast<long>(std::max<std::size_t>(center_rows, 1) / 2);
    for (std::size_t k = 0; k < rows; ++k) {
      if (std::abs(freq(k)) <= half) {
        keep[k] = 1;
        ++kept;
      }
    }
  }
  require(kept <= std::max(target, std::size_t{1}), ErrorKind::InvalidParameter,
          "center band keeps " + std::to_string(kept) + " rows, more than the " + std::to_string(target) +
              " allowed by R");

  // Candidate groups: {k, -k} pairs of positive frequencies, and the
  // self-mirrored Nyquist row. Weighted sampling without replacement via
  // exponential keys u^(1/w).
  struct Group {
    std::size_t a, b;
    double key;
  };
  std::vector<Group> groups;
  RandomStream rng(seed);
  const double spread = 0.25 * static_cast<double>(rows);
  for (std::size_t k = 1; k <= rows / 2; ++k) {
    if (keep[k]) continue;
    const std::size_t mirror = (rows - k) % rows;
    const double f = static_cast<double>(k);
    const double weight = std::exp(-f * f / (2.0 * spread * spread));
    groups.push_back({k, mirror, std::log(rng.uniform()) / weight});
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& l, const Group& r) { return l.key > r.key; });
  for (const auto& g : groups) {
    const std::size_t size = g.a == g.b ? 1 : 2;
    if (kept + size > target) continue;
    keep[g.a] = keep[g.b] = 1;
    kept += size;
  }

  std::vector<double> mask(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    if (keep[r]) std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, 1.0);
  return LinearOperator::masked_fourier(Tensor(shape, std::move(mask)));
}

}  // namespace splitcv
