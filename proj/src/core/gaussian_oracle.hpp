#pragma once

#include <span>
#include <vector>

#include "core/models.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace splitcv {

// y = x + e with x ~ N(0, sigma_x^2 I_m), e ~ N(0, sigma^2 I_m).
struct ToyModel {
  std::size_t m = 1;
  double sigma = 1.0;
  double sigma_x = 1.0;

  void validate() const;
};

struct ToyPosterior {
  Tensor mean;
  double variance = 0.0;  // isotropic
};

// x | y_minus, where y_minus carries noise variance sigma^2 / alpha.
ToyPosterior analytic_posterior(const ToyModel& toy, const Tensor& y_minus, double alpha);

// log p(y_plus | y_minus) for the split of y by w, using
// y_plus | y_minus ~ N(mean, (sigma^2/(1-alpha) + var) I).
double log_predictive(const ToyModel& toy, const Tensor& y, const Tensor& w, double alpha);

// log N(y; 0, (sigma^2 + sigma_x^2) I)
double log_marginal(const ToyModel& toy, const Tensor& y);

// Trapezoidal evaluation of log of the integral of p(y_plus|x) p(x|y_minus)
// over +-10 posterior standard deviations. m must be 1.
double quadrature_predictive(const ToyModel& toy, const Tensor& y, const Tensor& w, double alpha,
                             std::size_t nodes = 20001);

// Identity operator on [m], iid prior sigma_x, noise sigma.
BayesianModel toy_bayesian_model(const ToyModel& toy);

Tensor draw_toy_measurement(const ToyModel& toy, const SeedSpec& seed);

struct DiscriminationRow {
  double sigma_x_prime = 0.0;
  double alpha = 0.0;
  double mean_log_ratio = 0.0;
  double stderr_log_ratio = 0.0;
};

// 0.50, 0.55, ..., 2.00
std::vector<double> default_sigma_grid();

// Draws y from `truth` (stream seed/{0}), then for each sigma_x' averages
// log p(y+|y-, sigma_x) - log p(y+|y-, sigma_x') over K splits (streams
// seed/{1,k}), the same splits for every grid point.
std::vector<DiscriminationRow> discrimination_curve(const ToyModel& truth, std::span<const double> grid,
                                                    double alpha, std::size_t k_realizations,
                                                    const SeedSpec& seed);
// Same, for a given measurement.
std::vector<DiscriminationRow> discrimination_curve_for(const ToyModel& truth, const Tensor& y,
                                                        std::span<const double> grid, double alpha,
                                                        std::size_t k_realizations, const SeedSpec& seed);

struct ConvergenceStudy {
  double sigma = 0.05;
  double sigma_x = 1.0;
  std::vector<double> alphas{0.5};
  std::vector<std::size_t> dims{10};
  std::size_t n_max = 50000;
  std::vector<std::size_t> checkpoints;  // empty: decades from 100 up to n_max, then n_max
  std::size_t k_realizations = 25;
  SeedSpec seed;
  unsigned threads = 1;
};

struct ConvergenceRow {
  double alpha = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  double rel_log_error = 0.0;
};

std::vector<std::size_t> default_checkpoints(std::size_t n_max);

// Relative error |log p_hat - log p| / |log p| of the Monte Carlo predictive
// density (exact posterior draws) against log_predictive, averaged over K
// splits, reported for each (alpha, m) at each checkpoint N. The estimate at
// N uses the first N draws of one running stream.
std::vector<ConvergenceRow> mc_convergence_study(const ConvergenceStudy& study);

}  // namespace splitcv
