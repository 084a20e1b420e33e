#include "core/fission.hpp"

#include <cmath>

#include "core/error.hpp"

namespace splitcv {

namespace {

void check_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter,
          "alpha must lie in (0, 1)");
}

}  // namespace

double c_alpha(double alpha) {
  check_alpha(alpha);
  return std::sqrt(alpha / (1.0 - alpha));
}

Tensor FissionPair::recombine() const {
  return (1.0 - alpha) * y_plus + alpha * y_minus;
}

FissionPair split_with_noise(const Tensor& y, double sigma, double alpha, const Tensor& w) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter, "sigma must be positive");
  const double c = c_alpha(alpha);
  require(y.shape() == w.shape(), ErrorKind::Dimension,
          "injected noise shape " + shape_to_string(w.shape()) + " does not match measurement " +
              shape_to_string(y.shape()));
  std::vector<double> plus(y.size()), minus(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    plus[i] = y[i] + c * w[i];
    minus[i] = y[i] - w[i] / c;
  }
  return FissionPair{Tensor(y.shape(), std::move(plus)), Tensor(y.shape(), std::move(minus)), w, alpha, sigma};
}

FissionPair split(const Tensor& y, double sigma, double alpha, const SeedSpec& seed) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter, "sigma must be positive");
  check_alpha(alpha);
  return split_with_noise(y, sigma, alpha, gaussian_noise(y.shape(), sigma, seed));
}

SeedSpec realization_noise_seed(const SeedSpec& base, std::size_t k) {
  return base.child({1, k});
}

}  // namespace splitcv
