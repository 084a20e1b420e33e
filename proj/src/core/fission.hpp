#pragma once

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace splitcv {

// One splitting realization of a measurement y:
//   y_plus  = y + c_alpha * w
//   y_minus = y - w / c_alpha
// with w ~ N(0, sigma^2 I). Given x*, the halves are independent with
// covariances sigma^2/(1-alpha) I and sigma^2/alpha I.
struct FissionPair {
  Tensor y_plus;
  Tensor y_minus;
  Tensor w;
  double alpha = 0.5;
  double sigma = 1.0;

  // (1 - alpha) y_plus + alpha y_minus
  Tensor recombine() const;
};

double c_alpha(double alpha);

FissionPair split(const Tensor& y, double sigma, double alpha, const SeedSpec& seed);
FissionPair split_with_noise(const Tensor& y, double sigma, double alpha, const Tensor& w);

// Stream for the injected noise of realization k under a scoring seed.
SeedSpec realization_noise_seed(const SeedSpec& base, std::size_t k);

}  // namespace splitcv
