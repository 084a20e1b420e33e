#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "core/linops.hpp"
#include "core/tensor.hpp"

namespace splitcv {

struct IidGaussianPrior {
  double sigma_x = 1.0;
};

// -lambda * sum_p sqrt(|grad x|_p^2 + eps^2), forward differences with
// periodic wrap. Smooth stand-in for learned image priors.
struct CharbonnierTvPrior {
  double lambda = 10.0;
  double epsilon = 0.01;
};

using Prior = std::variant<IidGaussianPrior, CharbonnierTvPrior>;

// Log prior density up to an additive constant.
double prior_log_density(const Prior& prior, const Tensor& x);
Tensor prior_grad_log_density(const Prior& prior, const Tensor& x);
// 1/sigma_x^2 or 8 lambda / epsilon
double prior_lipschitz(const Prior& prior);
std::string describe(const Prior& prior);

struct GaussianLikelihood {
  std::shared_ptr<const LinearOperator> op;
  double sigma = 1.0;
  // Restricts metric norms to the interior; sampling always uses the full grid.
  std::optional<ValidMask> valid;
};

struct BayesianModel {
  Prior prior;
  GaussianLikelihood likelihood;
  std::string label;

  const LinearOperator& op() const { return *likelihood.op; }
  double sigma() const { return likelihood.sigma; }
};

BayesianModel make_model(Prior prior, std::shared_ptr<const LinearOperator> op, double sigma,
                         std::optional<ValidMask> valid = std::nullopt, std::string label = {});

enum class LikelihoodForm {
  Normalized,       // -|r|^2 / (2 sigma^2) - (m/2) log(2 pi sigma^2)
  SquaredResidual,  // |r|^2
};

// r = y - A x restricted to the measured entries (valid interior, or the
// Fourier support for masked operators); m counts those entries.
double residual_norm_sq(const GaussianLikelihood& lik, const Tensor& y, const Tensor& ax);
std::size_t measured_count(const GaussianLikelihood& lik);
double gaussian_log_density(double residual_sq, std::size_t m, double sigma);

double log_likelihood(const BayesianModel& model, const Tensor& y, const Tensor& x,
                      LikelihoodForm form = LikelihoodForm::Normalized);

// A^T (y - A x) / sigma^2 + grad log p(x), over the full grid.
Tensor grad_log_posterior(const BayesianModel& model, const Tensor& y, const Tensor& x);

// |A|^2 / sigma^2 + L_prior
double posterior_lipschitz_bound(const BayesianModel& model);

}  // namespace splitcv
