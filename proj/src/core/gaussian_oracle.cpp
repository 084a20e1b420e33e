#include "core/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/fission.hpp"
#include "core/models.hpp"
#include "core/parallel.hpp"
#include "core/samplers.hpp"
#include "core/scoring.hpp"

namespace splitcv {

void ToyModel::validate() const {
  require(m >= 1, ErrorKind::InvalidParameter, "toy dimension m must be >= 1");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter, "toy sigma must be positive");
  require(std::isfinite(sigma_x) && sigma_x > 0.0, ErrorKind::InvalidParameter, "toy sigma_x must be positive");
}

namespace {

void check_vec(const ToyModel& toy, const Tensor& v, const char* what) {
  require(v.size() == toy.m, ErrorKind::Dimension,
          std::string(what) + " has " + std::to_string(v.size()) + " entries, toy m = " + std::to_string(toy.m));
}

double log_normal_iso(std::span<const double> residual, double variance) {
  return -norm_sq(residual) / (2.0 * variance) -
         0.5 * static_cast<double>(residual.size()) * std::log(2.0 * std::numbers::pi * variance);
}

}  // namespace

ToyPosterior analytic_posterior(const ToyModel& toy, const Tensor& y_minus, double alpha) {
  toy.validate();
  c_alpha(alpha);
  check_vec(toy, y_minus, "y_minus");
  const double s2 = toy.sigma * toy.sigma, sx2 = toy.sigma_x * toy.sigma_x;
  const double gain = alpha * sx2 / (alpha * sx2 + s2);
  return ToyPosterior{gain * y_minus, s2 * sx2 / (s2 + alpha * sx2)};
}

double log_predictive(const ToyModel& toy, const Tensor& y, const Tensor& w, double alpha) {
  check_vec(toy, y, "y");
  check_vec(toy, w, "w");
  const auto pair = split_with_noise(y, toy.sigma, alpha, w);
  const auto post = analytic_posterior(toy, pair.y_minus, alpha);
  const double variance = toy.sigma * toy.sigma / (1.0 - alpha) + post.variance;
  const Tensor r = pair.y_plus - post.mean;
  return log_normal_iso(r.values(), variance);
}

double log_marginal(const ToyModel& toy, const Tensor& y) {
  toy.validate();
  check_vec(toy, y, "y");
  return log_normal_iso(y.values(), toy.sigma * toy.sigma + toy.sigma_x * toy.sigma_x);
}

double quadrature_predictive(const ToyModel& toy, const Tensor& y, const Tensor& w, double alpha,
                             std::size_t nodes) {
  require(toy.m == 1 && y.size() == 1 && w.size() == 1, ErrorKind::Unsupported,
          "quadrature oracle is one-dimensional");
  require(nodes >= 2, ErrorKind::InvalidParameter, "quadrature needs at least 2 nodes");
  const auto pair = split_with_noise(y, toy.sigma, alpha, w);
  const auto post = analytic_posterior(toy, pair.y_minus, alpha);
  const double mu = post.mean[0], sd = std::sqrt(post.variance);
  const double lik_var = toy.sigma * toy.sigma / (1.0 - alpha);
  const double yp = pair.y_plus[0];

  const double lo = mu - 10.0 * sd, hi = mu + 10.0 * sd;
  const double h = (hi - lo) / static_cast<double>(nodes - 1);
  std::vector<double> logs(nodes);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = lo + h * static_cast<double>(i);
    const double lp = -(yp - x) * (yp - x) / (2.0 * lik_var) - 0.5 * std::log(2.0 * std::numbers::pi * lik_var);
    const double lq = -(x - mu) * (x - mu) / (2.0 * post.variance) -
                      0.5 * std::log(2.0 * std::numbers::pi * post.variance);
    logs[i] = lp + lq;
    peak = std::max(peak, logs[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double weight = (i == 0 || i + 1 == nodes) ? 0.5 : 1.0;
    sum += weight * std::exp(logs[i] - peak);
  }
  return peak + std::log(sum * h);
}

BayesianModel toy_bayesian_model(const ToyModel& toy) {
  toy.validate();
  return make_model(IidGaussianPrior{toy.sigma_x}, std::make_shared<LinearOperator>(LinearOperator::identity({toy.m})),
                    toy.sigma, std::nullopt, "toy(sigma_x=" + std::to_string(toy.sigma_x) + ")");
}

Tensor draw_toy_measurement(const ToyModel& toy, const SeedSpec& seed) {
  toy.validate();
  RandomStream rng(seed);
  std::vector<double> y(toy.m);
  for (auto& v : y) v = toy.sigma_x * rng.normal();
  for (auto& v : y) v += toy.sigma * rng.normal();
  return Tensor({toy.m}, std::move(y));
}

std::vector<double> default_sigma_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(0.5 + 0.05 * i);
  return grid;
}

std::vector<DiscriminationRow> discrimination_curve_for(const ToyModel& truth, const Tensor& y,
                                                        std::span<const double> grid, double alpha,
                                                        std::size_t k_realizations, const SeedSpec& seed) {
  truth.validate();
  require(!grid.empty(), ErrorKind::InvalidParameter, "sigma_x' grid is empty");
  require(k_realizations >= 1, ErrorKind::InvalidParameter, "K must be >= 1");
  std::vector<Tensor> noises;
  std::vector<double> reference;
  for (std::size_t k = 0; k < k_realizations; ++k) {
    noises.push_back(gaussian_noise(y.shape(), truth.sigma, realization_noise_seed(seed, k)));
    reference.push_back(log_predictive(truth, y, noises.back(), alpha));
  }
  std::vector<DiscriminationRow> rows;
  for (double sx : grid) {
    ToyModel alt = truth;
    alt.sigma_x = sx;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < k_realizations; ++k) {
      const double d = sx == truth.sigma_x ? 0.0 : reference[k] - log_predictive(alt, y, noises[k], alpha);
      sum += d;
      sum_sq += d * d;
    }
    const double kk = static_cast<double>(k_realizations);
    const double mean = sum / kk;
    const double var = k_realizations > 1 ? std::max(0.0, (sum_sq - kk * mean * mean) / (kk - 1.0)) : 0.0;
    rows.push_back({sx, alpha, mean, std::sqrt(var / kk)});
  }
  return rows;
}

std::vector<DiscriminationRow> discrimination_curve(const ToyModel& truth, std::span<const double> grid,
                                                    double alpha, std::size_t k_realizations,
                                                    const SeedSpec& seed) {
  const Tensor y = draw_toy_measurement(truth, seed.child(0));
  return discrimination_curve_for(truth, y, grid, alpha, k_realizations, seed);
}

std::vector<std::size_t> default_checkpoints(std::size_t n_max) {
  std::vector<std::size_t> out;
  for (std::size_t n = 100; n < n_max; n *= 10) out.push_back(n);
  out.push_back(n_max);
  return out;
}

std::vector<ConvergenceRow> mc_convergence_study(const ConvergenceStudy& study) {
  require(study.n_max >= 100, ErrorKind::InvalidParameter, "N_max must be >= 100");
  require(study.k_realizations >= 1, ErrorKind::InvalidParameter, "K must be >= 1");
  require(!study.alphas.empty() && !study.dims.empty(), ErrorKind::InvalidParameter,
          "convergence study needs at least one alpha and one dimension");
  auto checkpoints = study.checkpoints.empty() ? default_checkpoints(study.n_max) : study.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  require(checkpoints.front() >= 1 && checkpoints.back() <= study.n_max, ErrorKind::InvalidParameter,
          "checkpoints must lie in [1, N_max]");

  std::vector<ConvergenceRow> rows;
  for (std::size_t di = 0; di < study.dims.size(); ++di) {
    const ToyModel toy{study.dims[di], study.sigma, study.sigma_x};
    toy.validate();
    const Tensor y = draw_toy_measurement(toy, study.seed.child({0, di}));
    for (std::size_t ai = 0; ai < study.alphas.size(); ++ai) {
      const double alpha = study.alphas[ai];
      c_alpha(alpha);
      const SeedSpec base = study.seed.child({1, di, ai});
      // errors[k][c]
      std::vector<std::vector<double>> errors(study.k_realizations);
      parallel_for(study.k_realizations, study.threads, [&](std::size_t k) {
        const auto w = gaussian_noise(y.shape(), toy.sigma, realization_noise_seed(base, k));
        const auto pair = split_with_noise(y, toy.sigma, alpha, w);
        const double exact = log_predictive(toy, y, w, alpha);
        const auto conditioning = with_noise_sigma(toy_bayesian_model(toy), toy.sigma / std::sqrt(alpha));
        const double plus_sigma = toy.sigma / std::sqrt(1.0 - alpha);
        LogMeanExp running;
        std::size_t next = 0;
        SamplerConfig exact_sampler;
        visit_posterior_samples(conditioning, pair.y_minus, study.n_max, exact_sampler, base.child({2, k}),
                                [&](std::size_t n, const Tensor& x) {
                                  const Tensor r = pair.y_plus - x;
                                  running.add(gaussian_log_density(norm_sq(r.values()), toy.m, plus_sigma));
                                  while (next < checkpoints.size() && checkpoints[next] == n + 1) {
                                    errors[k].push_back(std::abs(running.value() - exact) / std::abs(exact));
                                    ++next;
                                  }
                                });
      });
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double sum = 0.0;
        for (const auto& e : errors) sum += e[c];
        rows.push_back({alpha, toy.m, checkpoints[c], study.k_realizations,
                        sum / static_cast<double>(study.k_realizations)});
      }
    }
  }
  return rows;
}

}  // namespace splitcv
