#include "core/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "core/error.hpp"

namespace splitcv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_prior(const Prior& prior) {
  std::visit(overloaded{
                 [](const IidGaussianPrior& p) {
                   require(std::isfinite(p.sigma_x) && p.sigma_x > 0.0, ErrorKind::InvalidParameter,
                           "prior sigma_x must be positive");
                 },
                 [](const CharbonnierTvPrior& p) {
                   require(std::isfinite(p.lambda) && p.lambda > 0.0, ErrorKind::InvalidParameter,
                           "TV lambda must be positive");
                   require(std::isfinite(p.epsilon) && p.epsilon > 0.0, ErrorKind::InvalidParameter,
                           "TV epsilon must be positive");
                 },
             },
             prior);
}

// Calls f(p, q, r) for each pixel p with forward neighbours q (along the
// last axis) and r (along the first axis of a 2-D grid; r == p in 1-D).
template <class F>
void for_each_difference(const Shape& shape, F&& f) {
  if (shape.size() == 1) {
    const std::size_t n = shape[0];
    for (std::size_t i = 0; i < n; ++i) f(i, (i + 1) % n, i);
  } else if (shape.size() == 2) {
    const std::size_t h = shape[0], w = shape[1];
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) f(i * w + j, i * w + (j + 1) % w, ((i + 1) % h) * w + j);
  } else {
    fail(ErrorKind::Unsupported, "TV prior supports 1-D and 2-D tensors only");
  }
}

}  // namespace

double prior_log_density(const Prior& prior, const Tensor& x) {
  check_prior(prior);
  return std::visit(overloaded{
                        [&](const IidGaussianPrior& p) {
                          return -norm_sq(x.values()) / (2.0 * p.sigma_x * p.sigma_x);
                        },
                        [&](const CharbonnierTvPrior& p) {
                          const double eps2 = p.epsilon * p.epsilon;
                          const bool flat = x.ndim() == 1;
                          double total = 0.0;
                          for_each_difference(x.shape(), [&](std::size_t i, std::size_t q, std::size_t r) {
                            const double dx = x[q] - x[i];
                            const double dy = flat ? 0.0 : x[r] - x[i];
                            total += std::sqrt(dx * dx + dy * dy + eps2);
                          });
                          return -p.lambda * total;
                        },
                    },
                    prior);
}

Tensor prior_grad_log_density(const Prior& prior, const Tensor& x) {
  check_prior(prior);
  return std::visit(overloaded{
                        [&](const IidGaussianPrior& p) {
                          return (-1.0 / (p.sigma_x * p.sigma_x)) * x;
                        },
                        [&](const CharbonnierTvPrior& p) {
                          const double eps2 = p.epsilon * p.epsilon;
                          const bool flat = x.ndim() == 1;
                          std::vector<double> g(x.size(), 0.0);
                          for_each_difference(x.shape(), [&](std::size_t i, std::size_t q, std::size_t r) {
                            const double dx = x[q] - x[i];
                            const double dy = flat ? 0.0 : x[r] - x[i];
                            const double phi = std::sqrt(dx * dx + dy * dy + eps2);
                            // d(-lambda phi)/dx_i etc.
                            g[i] += p.lambda * (dx + dy) / phi;
                            g[q] -= p.lambda * dx / phi;
                            if (!flat) g[r] -= p.lambda * dy / phi;
                          });
                          return Tensor(x.shape(), std::move(g));
                        },
                    },
                    prior);
}

double prior_lipschitz(const Prior& prior) {
  check_prior(prior);
  return std::visit(overloaded{
                        [](const IidGaussianPrior& p) { return 1.0 / (p.sigma_x * p.sigma_x); },
                        [](const CharbonnierTvPrior& p) { return 8.0 * p.lambda / p.epsilon; },
                    },
                    prior);
}

std::string describe(const Prior& prior) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const IidGaussianPrior& p) { os << "gaussian(sigma_x=" << p.sigma_x << ")"; },
                 [&](const CharbonnierTvPrior& p) {
                   os << "charbonnier_tv(lambda=" << p.lambda << ",epsilon=" << p.epsilon << ")";
                 },
             },
             prior);
  return os.str();
}

BayesianModel make_model(Prior prior, std::shared_ptr<const LinearOperator> op, double sigma,
                         std::optional<ValidMask> valid, std::string label) {
  check_prior(prior);
  require(op != nullptr, ErrorKind::InvalidParameter, "model needs a forward operator");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter, "noise sigma must be positive");
  if (valid && valid->border > 0) {
    require(!op->output_support().has_value(), ErrorKind::Unsupported,
            "valid crop is not defined for masked Fourier measurements");
    for (auto d : op->output_shape())
      require(2 * valid->border < d, ErrorKind::Dimension, "valid crop border too large for measurement");
  }
  return BayesianModel{std::move(prior), GaussianLikelihood{std::move(op), sigma, valid}, std::move(label)};
}

double residual_norm_sq(const GaussianLikelihood& lik, const Tensor& y, const Tensor& ax) {
  require(y.shape() == ax.shape(), ErrorKind::Dimension,
          "measurement shape " + shape_to_string(y.shape()) + " does not match operator output " +
              shape_to_string(ax.shape()));
  if (lik.valid && lik.valid->border > 0) {
    const Tensor r = valid_crop(y - ax, *lik.valid);
    return norm_sq(r.values());
  }
  double total = 0.0;
  if (const auto& support = lik.op->output_support()) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = (y[i] - ax[i]) * (*support)[i];
      total += r * r;
    }
    return total;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - ax[i];
    total += r * r;
  }
  return total;
}

std::size_t measured_count(const GaussianLikelihood& lik) {
  if (lik.valid && lik.valid->border > 0) {
    std::size_t n = 1;
    for (auto d : lik.op->output_shape()) n *= d - 2 * lik.valid->border;
    return n;
  }
  if (const auto& support = lik.op->output_support()) {
    std::size_t n = 0;
    for (double v : support->values()) n += v != 0.0;
    return n;
  }
  return lik.op->output_size();
}

double gaussian_log_density(double residual_sq, std::size_t m, double sigma) {
  return -residual_sq / (2.0 * sigma * sigma) -
         0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

double log_likelihood(const BayesianModel& model, const Tensor& y, const Tensor& x, LikelihoodForm form) {
  const double r2 = residual_norm_sq(model.likelihood, y, model.op().apply(x));
  if (form == LikelihoodForm::SquaredResidual) return r2;
  return gaussian_log_density(r2, measured_count(model.likelihood), model.sigma());
}

Tensor grad_log_posterior(const BayesianModel& model, const Tensor& y, const Tensor& x) {
  const auto& op = model.op();
  require(y.shape() == op.output_shape(), ErrorKind::Dimension, "measurement does not match operator output");
  const double inv_var = 1.0 / (model.sigma() * model.sigma());
  const Tensor data_term = op.apply_adjoint(y - op.apply(x));
  return inv_var * data_term + prior_grad_log_density(model.prior, x);
}

double posterior_lipschitz_bound(const BayesianModel& model) {
  const double s = model.sigma();
  return model.op().spectral_norm_sq() / (s * s) + prior_lipschitz(model.prior);
}

}  // namespace splitcv
