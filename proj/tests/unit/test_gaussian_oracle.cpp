#include <doctest.h>

#include "core/fission.hpp"
#include "core/gaussian_oracle.hpp"
#include "support.hpp"

using namespace splitcv;

namespace {

// log of the integral of N(y+; x, s^2/(1-a)) N(y-; x, s^2/a) N(x; 0, sx^2) over x,
// divided by the same integral without the y+ factor. Independent of the
// library's posterior formulas.
double predictive_by_quadrature(double sigma, double sigma_x, double y, double w, double alpha) {
  const double c = std::sqrt(alpha / (1 - alpha));
  const double yp = y + c * w, ym = y - w / c;
  const double vp = sigma * sigma / (1 - alpha), vm = sigma * sigma / alpha, vx = sigma_x * sigma_x;
  // centre the grid on the product's peak to keep the exponentials in range
  const double prec = 1 / vp + 1 / vm + 1 / vx;
  const double centre = (yp / vp + ym / vm) / prec, half = 12 / std::sqrt(prec);
  auto log_joint = [&](double x) { return testing::log_normal_pdf(ym, x, vm) + testing::log_normal_pdf(x, 0, vx); };
  const double shift = log_joint(centre) + testing::log_normal_pdf(yp, centre, vp);
  const double num = testing::trapezoid(
      [&](double x) { return std::exp(log_joint(x) + testing::log_normal_pdf(yp, x, vp) - shift); }, centre - half,
      centre + half, 40001);
  const double prec2 = 1 / vm + 1 / vx;
  const double centre2 = (ym / vm) / prec2, half2 = 12 / std::sqrt(prec2);
  const double shift2 = log_joint(centre2);
  const double den = testing::trapezoid([&](double x) { return std::exp(log_joint(x) - shift2); }, centre2 - half2,
                                        centre2 + half2, 40001);
  return std::log(num) + shift - std::log(den) - shift2;
}

}  // namespace

TEST_CASE("analytic posterior examples") {
  const ToyModel toy{1, 1.0, 1.0};
  const auto p = analytic_posterior(toy, Tensor({1}, {2.0}), 0.5);
  CHECK(p.mean[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // quadrature of x N(y-; x, 2) N(x; 0, 1)
  auto w = [](double x) { return std::exp(-(2 - x) * (2 - x) / 4 - x * x / 2); };
  const double z = testing::trapezoid(w, -15, 15, 30001);
  const double mean = testing::trapezoid([&](double x) { return x * w(x); }, -15, 15, 30001) / z;
  const double var = testing::trapezoid([&](double x) { return (x - mean) * (x - mean) * w(x); }, -15, 15, 30001) / z;
  CHECK(mean == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(var == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

  const auto full = analytic_posterior(toy, Tensor({1}, {2.0}), 1.0 - 1e-12);
  CHECK(full.mean[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(full.variance == doctest::Approx(0.5).epsilon(1e-9));
  const auto tight = analytic_posterior(ToyModel{1, 1.0, 1e-8}, Tensor({1}, {2.0}), 0.5);
  CHECK(std::abs(tight.mean[0]) < 1e-12);
  CHECK(tight.variance < 1e-15);
  CHECK_THROWS_KIND(analytic_posterior(toy, Tensor({1}, {2.0}), 1.0), ErrorKind::InvalidParameter);
}

TEST_CASE("log_predictive closed form") {
  const ToyModel toy{1, 1.0, 1.0};
  CHECK(log_predictive(toy, Tensor({1}, {0.0}), Tensor({1}, {0.0}), 0.5) ==
        doctest::Approx(-0.5 * std::log(2 * M_PI * 8.0 / 3.0)).epsilon(1e-14));
  CHECK(predictive_by_quadrature(1, 1, 0, 0, 0.5) ==
        doctest::Approx(-0.5 * std::log(2 * M_PI * 8.0 / 3.0)).epsilon(1e-8));
}

TEST_CASE("closed form agrees with independent quadrature (property)") {
  testing::Gen g(41);
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = g.uniform(0.05, 3), sigma_x = g.uniform(0.05, 3), alpha = g.uniform(0.02, 0.98);
    const double y = g.uniform(-3, 3), w = sigma * g.normal();
    const ToyModel toy{1, sigma, sigma_x};
    const double closed = log_predictive(toy, Tensor({1}, {y}), Tensor({1}, {w}), alpha);
    const double ours = predictive_by_quadrature(sigma, sigma_x, y, w, alpha);
    const double lib = quadrature_predictive(toy, Tensor({1}, {y}), Tensor({1}, {w}), alpha);
    CHECK(std::abs(closed - ours) <= 1e-8 * std::max(1.0, std::abs(closed)));
    CHECK(std::abs(closed - lib) <= 1e-8 * std::abs(closed));
  }
}

TEST_CASE("quadrature oracle edge cases") {
  const ToyModel toy{1, 1.0, 1.0};
  const double coarse = quadrature_predictive(toy, Tensor({1}, {0.3}), Tensor({1}, {0.1}), 0.5, 10);
  CHECK(std::isfinite(coarse));
  CHECK_THROWS_KIND(quadrature_predictive(ToyModel{2, 1, 1}, Tensor({2}, {0, 0}), Tensor({2}, {0, 0}), 0.5),
                    ErrorKind::Unsupported);
}

TEST_CASE("small alpha recovers the marginal likelihood") {
  const ToyModel toy{1, 0.7, 1.3};
  const Tensor y({1}, {0.8}), w({1}, {0.4});
  CHECK(log_predictive(toy, y, w, 1e-6) == doctest::Approx(log_marginal(toy, y)).epsilon(1e-3));
  CHECK(log_marginal(toy, y) == doctest::Approx(testing::log_normal_pdf(0.8, 0, 0.49 + 1.69)).epsilon(1e-14));
}

TEST_CASE("log_predictive factorizes over coordinates") {
  const ToyModel toy2{2, 0.5, 1.5}, toy1{1, 0.5, 1.5};
  const double a = 0.3, b = -1.2, wa = 0.1, wb = 0.7;
  const double joint = log_predictive(toy2, Tensor({2}, {a, b}), Tensor({2}, {wa, wb}), 0.3);
  const double sum = log_predictive(toy1, Tensor({1}, {a}), Tensor({1}, {wa}), 0.3) +
                     log_predictive(toy1, Tensor({1}, {b}), Tensor({1}, {wb}), 0.3);
  CHECK(joint == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("discrimination curve") {
  const ToyModel truth{200, 1.0, 1.0};
  const auto grid = default_sigma_grid();
  REQUIRE(grid.size() == 31);
  CHECK(grid.front() == 0.5);
  CHECK(grid.back() == doctest::Approx(2.0));
  const auto rows = discrimination_curve(truth, grid, 0.3, 20, SeedSpec{3, {}});
  REQUIRE(rows.size() == 31);
  for (const auto& r : rows) {
    if (r.sigma_x_prime == 1.0) {
      CHECK(r.mean_log_ratio == 0.0);
      CHECK(r.stderr_log_ratio == 0.0);
    }
  }
  CHECK(rows.front().mean_log_ratio > 0);
  CHECK(rows.back().mean_log_ratio > 0);
  CHECK_THROWS_KIND(discrimination_curve(truth, std::vector<double>{}, 0.3, 20, SeedSpec{}),
                    ErrorKind::InvalidParameter);
}

TEST_CASE("convergence study shape and trend") {
  ConvergenceStudy s;
  s.dims = {1, 10};
  s.n_max = 1000;
  s.k_realizations = 3;
  const auto rows = mc_convergence_study(s);
  CHECK(rows.size() == 2 * 2);
  CHECK(default_checkpoints(50000) == std::vector<std::size_t>{100, 1000, 10000, 50000});
  CHECK(default_checkpoints(1000) == std::vector<std::size_t>{100, 1000});
  for (const auto& r : rows) CHECK(std::isfinite(r.rel_log_error));
  ConvergenceStudy bad;
  bad.n_max = 50;
  CHECK_THROWS_KIND(mc_convergence_study(bad), ErrorKind::InvalidParameter);
}
