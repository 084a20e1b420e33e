#include <doctest.h>

#include <map>
#include <mutex>
#include <set>

#include "core/fission.hpp"
#include "core/gaussian_oracle.hpp"
#include "core/scoring.hpp"
#include "support.hpp"

using namespace splitcv;

namespace {

ScoreParams params(std::size_t K, std::size_t N, double alpha = 0.5, std::uint64_t seed = 1) {
  ScoreParams p;
  p.k_realizations = K;
  p.n_samples = N;
  p.l_samples = 10;
  p.alpha = alpha;
  p.seed = SeedSpec{seed, {}};
  return p;
}

std::shared_ptr<const LinearOperator> share(LinearOperator op) {
  return std::make_shared<const LinearOperator>(std::move(op));
}

}  // namespace

TEST_CASE("metric names") {
  CHECK(parse_metric("phi2") == Metric::Phi2);
  CHECK(std::string(to_string(Metric::Phi3)) == "phi3");
  CHECK_THROWS_KIND(parse_metric("phi4"), ErrorKind::InvalidParameter);
}

TEST_CASE("embeddings") {
  const Tensor x({2, 2}, {1, 2, 3, 4});
  CHECK(Embedding::identity()(x) == Tensor({4}, {1, 2, 3, 4}));
  CHECK(Embedding::pyramid(1)(x) == Embedding::identity()(x));
  const Tensor c = Tensor::filled({8, 8}, 3.0);
  const Tensor f = Embedding::pyramid(3)(c);
  REQUIRE(f.size() == 64 + 16 + 4);
  for (std::size_t i = 0; i < 64; ++i) CHECK(f[i] == doctest::Approx(3.0));
  for (std::size_t i = 64; i < 80; ++i) CHECK(f[i] == doctest::Approx(1.5));
  for (std::size_t i = 80; i < 84; ++i) CHECK(f[i] == doctest::Approx(0.75));
  const Embedding ext = Embedding::external(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  CHECK(ext(x, 1) == Tensor({3}, {4, 5, 6}));
  CHECK_THROWS_KIND(ext(x, 2), ErrorKind::Lookup);
  CHECK_THROWS_KIND(Embedding::external_from_file("/nonexistent/emb.ft64"), ErrorKind::Io);
  CHECK_THROWS_KIND(Embedding::pyramid(0), ErrorKind::InvalidParameter);
}

TEST_CASE("LogMeanExp is stable and order independent") {
  LogMeanExp a;
  for (double v : {-1000.0, -1001.0, -999.0}) a.add(v);
  const double expect = -999.0 + std::log(1 + std::exp(-1.0) + std::exp(-2.0)) - std::log(3.0);
  CHECK(a.value() == doctest::Approx(expect).epsilon(1e-14));
  LogMeanExp b, c;
  b.add(-1001.0);
  c.add(-999.0);
  c.add(-1000.0);
  b.merge(c);
  CHECK(b.value() == doctest::Approx(expect).epsilon(1e-14));
  LogMeanExp z;
  z.add(-INFINITY);
  CHECK(z.log_sum() == -INFINITY);
}

TEST_CASE("phi1 on the scalar toy matches Gaussian moments") {
  // y = 0, A = I, sigma = sigma_x = 1, alpha = 0.5. Given w: y- = -w, y+ = w,
  // x | y- ~ N(-w/3, 2/3), so E|y+ - x|^2 = 2/3 + (4w/3)^2 and E over w gives 2/3 + 16/9.
  const ToyModel toy{1, 1.0, 1.0};
  const auto model = toy_bayesian_model(toy);
  const auto r = phi1(model, Tensor({1}, {0.0}), params(100, 100));
  CHECK(r.phi1.value() == doctest::Approx(2.0 / 3.0 + 16.0 / 9.0).epsilon(0.05));
  CHECK(r.partials.size() == 100);
  // conditional on the drawn w_k the expectation is exact
  double expected = 0;
  for (std::size_t k = 0; k < 100; ++k) {
    const double w = gaussian_noise({1}, 1.0, realization_noise_seed(SeedSpec{1, {}}, k))[0];
    expected += 2.0 / 3.0 + 16.0 * w * w / 9.0;
  }
  CHECK(r.phi1.value() == doctest::Approx(expected / 100).epsilon(0.03));
}

TEST_CASE("phi1 with a point-mass posterior is |y|^2") {
  const auto model = toy_bayesian_model(ToyModel{3, 1.0, 1e-12});
  const Tensor y({3}, {1, 2, -2});
  auto p = params(1, 1);
  // with a single realization the residual is |y+|^2, y+ = y + w; check via the partials
  const auto r = phi1(model, y, p);
  const Tensor w = gaussian_noise({3}, 1.0, realization_noise_seed(p.seed, 0));
  CHECK(r.phi1.value() == doctest::Approx(norm_sq((y + w).values())).epsilon(1e-9));
}

TEST_CASE("phi2 degenerate and positive cases") {
  const Tensor y({4}, {1, 0, -1, 2});
  const auto point = phi2(toy_bayesian_model(ToyModel{4, 1.0, 1e-12}), y, params(3, 5));
  CHECK(point.phi2.value() < 1e-9);
  const auto spread = phi2(toy_bayesian_model(ToyModel{4, 1.0, 1.0}), y, params(3, 5));
  CHECK(spread.phi2.value() > 0.0);
  CHECK(spread.l_samples == 10);
}

TEST_CASE("phi2 favours the matched prior at small alpha") {
  std::size_t wins = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ToyModel truth{64, 1.0, 1.0};
    const Tensor y = draw_toy_measurement(truth, SeedSpec{s, {0}});
    auto p = params(10, 20, 0.1, s);
    p.l_samples = 20;
    const double matched = phi2(toy_bayesian_model(truth), y, p).phi2.value();
    const double mismatched = phi2(toy_bayesian_model(ToyModel{64, 1.0, 4.0}), y, p).phi2.value();
    wins += mismatched > matched;
  }
  CHECK(wins >= 16);
}

TEST_CASE("phi3 converges to the closed form and stays finite in high dimension") {
  const ToyModel toy{1, 1.0, 1.0};
  const Tensor y({1}, {0.7});
  auto p = params(25, 50000, 0.5, 9);
  const auto r = phi3_log(toy_bayesian_model(toy), y, p);
  // average the closed form over the same w_k in the log-mean-exp sense
  LogMeanExp exact;
  for (std::size_t k = 0; k < 25; ++k) {
    const Tensor w = gaussian_noise({1}, 1.0, realization_noise_seed(p.seed, k));
    exact.add(log_predictive(toy, y, w, 0.5));
  }
  CHECK(std::abs(r.phi3_log.value() - exact.value()) / std::abs(exact.value()) <= 0.02);

  const ToyModel big{4096, 1.0, 1.0};
  const Tensor yb = draw_toy_measurement(big, SeedSpec{1, {}});
  const auto rb = phi3_log(toy_bayesian_model(big), yb, params(2, 5));
  CHECK(std::isfinite(rb.phi3_log.value()));
  CHECK(rb.phi3_log.value() < -700.0);  // exp() of this underflows in double
  CHECK(std::exp(rb.phi3_log.value()) == 0.0);
}

TEST_CASE("phi3 at tiny alpha approaches the marginal likelihood") {
  const ToyModel toy{1, 1.0, 1.0};
  const Tensor y({1}, {0.4});
  const auto r = phi3_log(toy_bayesian_model(toy), y, params(20, 20000, 1e-6, 3));
  CHECK(std::abs(r.phi3_log.value() - log_marginal(toy, y)) <= 1e-2);
}

TEST_CASE("score reports are deterministic across thread counts") {
  const ToyModel toy{16, 0.5, 1.0};
  const Tensor y = draw_toy_measurement(toy, SeedSpec{2, {}});
  for (Metric m : {Metric::Phi1, Metric::Phi2, Metric::Phi3}) {
    auto p1 = params(8, 20);
    auto p4 = p1;
    p4.threads = 4;
    const auto a = score(m, toy_bayesian_model(toy), y, p1);
    const auto b = score(m, toy_bayesian_model(toy), y, p4);
    CHECK(a.partials == b.partials);
    CHECK(a.value() == b.value());
  }
}

TEST_CASE("hooks: ordered partials, resume and sample indices") {
  const ToyModel toy{4, 0.5, 1.0};
  const Tensor y = draw_toy_measurement(toy, SeedSpec{5, {}});
  auto p = params(6, 3);
  p.threads = 3;
  std::vector<std::size_t> order;
  std::map<std::size_t, double> seen;
  ScoreHooks hooks;
  hooks.on_realization = [&](std::size_t k, double v) {
    order.push_back(k);
    seen[k] = v;
  };
  const auto full = phi2(toy_bayesian_model(toy), y, p, hooks);
  CHECK(order == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  ScoreHooks resume;
  resume.resume = {{0, seen[0]}, {1, seen[1]}, {2, seen[2]}};
  std::set<std::size_t> indices;
  std::mutex mu;
  resume.on_sample = [&](std::size_t i, const Tensor&) {
    std::lock_guard lock(mu);
    indices.insert(i);
  };
  const auto resumed = phi2(toy_bayesian_model(toy), y, p, resume);
  CHECK(resumed.partials == full.partials);
  CHECK(resumed.value() == full.value());
  // only k = 3..5 sampled; stride N + L = 13
  CHECK(indices.size() == 3 * 13);
  CHECK(*indices.begin() == 3 * 13);
  CHECK(*indices.rbegin() == 6 * 13 - 1);
}

TEST_CASE("valid crop: mask-then-norm equals crop-then-norm") {
  testing::Gen g(8);
  const Shape shape{12, 12};
  const auto op = share(LinearOperator::circulant(make_kernel(KernelFamily::Gaussian, std::vector{1.0}, 5).values, shape));
  const auto cropped = make_model(IidGaussianPrior{1.0}, op, 0.2, ValidMask{2});
  const Tensor y = g.tensor(shape);
  const auto p = params(2, 3);
  const auto r = phi1(cropped, y, p);
  double total = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto pair = split(y, 0.2, 0.5, realization_noise_seed(p.seed, k));
    const auto set = sample_exact(with_noise_sigma(cropped, 0.2 / std::sqrt(0.5)), pair.y_minus, 3,
                                  minus_chain_seed(p.seed, k));
    for (const auto& x : set.samples)
      total += norm_sq(valid_crop(pair.y_plus - op->apply(x), ValidMask{2}).values());
  }
  CHECK(r.phi1.value() == doctest::Approx(total / 6).epsilon(1e-12));
}

TEST_CASE("scoring validates its inputs and leaves them untouched") {
  const auto model = toy_bayesian_model(ToyModel{3, 1.0, 1.0});
  const Tensor y({3}, {1, 2, 3});
  const Tensor copy = y;
  CHECK_THROWS_KIND(phi1(model, Tensor({2}, {1, 2}), params(1, 1)), ErrorKind::Dimension);
  CHECK_THROWS_KIND(phi1(model, y, params(0, 1)), ErrorKind::InvalidParameter);
  CHECK_THROWS_KIND(phi1(model, y, params(1, 0)), ErrorKind::InvalidParameter);
  CHECK_THROWS_KIND(phi1(model, y, params(1, 1, 1.0)), ErrorKind::InvalidParameter);
  auto p = params(1, 1);
  p.l_samples = 0;
  CHECK_THROWS_KIND(phi2(model, y, p), ErrorKind::InvalidParameter);
  p.l_samples = 2;
  p.embedding = Embedding::external(Tensor({1, 3}, {0, 0, 0}));
  CHECK_THROWS_KIND(phi2(model, y, p), ErrorKind::Lookup);
  const auto a = phi1(model, y, params(2, 2));
  const auto b = phi1(model, y, params(2, 2));
  CHECK(y == copy);
  CHECK(a.partials == b.partials);
}
