#include "core/samplers.hpp"

#include <cmath>

#include "core/error.hpp"

namespace splitcv {

const char* to_string(SamplerKind kind) {
  return kind == SamplerKind::Ula ? "ula" : "exact";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "exact" || name == "exact_conjugate") return SamplerKind::ExactConjugate;
  if (name == "ula") return SamplerKind::Ula;
  fail(ErrorKind::InvalidParameter, "unknown sampler '" + name + "'");
}

Tensor SampleSet::stacked() const { return stack(samples); }

bool is_conjugate(const BayesianModel& model) {
  return std::holds_alternative<IidGaussianPrior>(model.prior) && model.op().fourier_diagonal();
}

ConjugatePosterior::ConjugatePosterior(const BayesianModel& model, const Tensor& y) {
  require(std::holds_alternative<IidGaussianPrior>(model.prior), ErrorKind::Unsupported,
          "exact sampler needs an iid Gaussian prior");
  const auto& op = model.op();
  require(op.fourier_diagonal(), ErrorKind::Unsupported, "exact sampler needs a Fourier-diagonal operator");
  require(y.shape() == op.output_shape(), ErrorKind::Dimension,
          "measurement " + shape_to_string(y.shape()) + " does not match operator output " +
              shape_to_string(op.output_shape()));

  const double sx = std::get<IidGaussianPrior>(model.prior).sigma_x;
  const double noise_var = model.sigma() * model.sigma();
  const double prior_prec = 1.0 / (sx * sx);
  shape_ = op.input_shape();

  if (op.kind() == LinearOperator::Kind::Identity) {
    pixel_domain_ = true;
    const double v = 1.0 / (1.0 / noise_var + prior_prec);
    variance_hat_.assign(y.size(), v);
    sd_hat_.assign(y.size(), std::sqrt(v));
    mean_ = (v / noise_var) * y;
    return;
  }

  const auto& d = op.spectrum();
  const auto b_hat = dft_real(op.apply_adjoint(y).values(), shape_);
  const auto n = b_hat.size();
  mean_hat_.resize(n);
  variance_hat_.resize(n);
  sd_hat_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = 1.0 / (std::norm(d[i]) / noise_var + prior_prec);
    variance_hat_[i] = v;
    sd_hat_[i] = std::sqrt(v);
    mean_hat_[i] = (v / noise_var) * b_hat[i];
  }
  mean_ = Tensor(shape_, idft_real(mean_hat_, shape_));
}

Tensor ConjugatePosterior::draw(RandomStream& rng, double* max_imag) const {
  const auto n = shape_size(shape_);
  std::vector<double> eps(n);
  for (auto& e : eps) e = rng.normal();
  if (pixel_domain_) {
    for (std::size_t i = 0; i < n; ++i) eps[i] = mean_[i] + sd_hat_[i] * eps[i];
    return Tensor(shape_, std::move(eps));
  }
  // F of real white noise is Hermitian white noise, so scaling by a
  // mirror-symmetric sd keeps the inverse transform real.
  auto coeffs = dft_real(eps, shape_);
  for (std::size_t i = 0; i < n; ++i) coeffs[i] = mean_hat_[i] + sd_hat_[i] * coeffs[i];
  double imag = 0.0;
  auto x = idft_real(coeffs, shape_, &imag);
  if (max_imag) *max_imag = std::max(*max_imag, imag);
  return Tensor(shape_, std::move(x));
}

namespace {

class MomentAccumulator {
 public:
  void add(const Tensor& x) {
    if (count_ == 0) {
      shape_ = x.shape();
      mean_.assign(x.size(), 0.0);
      m2_.assign(x.size(), 0.0);
    }
    ++count_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_);
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }

  void finish(SampleDiagnostics& diag) const {
    if (count_ == 0) return;
    std::vector<double> var(m2_.size(), 0.0);
    if (count_ > 1)
      for (std::size_t i = 0; i < var.size(); ++i) var[i] = m2_[i] / static_cast<double>(count_ - 1);
    diag.mean = Tensor(shape_, mean_);
    diag.variance = Tensor(shape_, std::move(var));
  }

 private:
  std::size_t count_ = 0;
  Shape shape_;
  std::vector<double> mean_, m2_;
};

void check_config(const SamplerConfig& config) {
  require(config.thinning >= 1, ErrorKind::InvalidParameter, "thinning must be >= 1");
  if (config.kind == SamplerKind::Ula)
    require(std::isfinite(config.step_scale) && config.step_scale > 0.0 && config.step_scale <= 1.0,
            ErrorKind::InvalidParameter, "step_scale must lie in (0, 1]");
}

SampleDiagnostics visit_exact(const BayesianModel& model, const Tensor& y, std::size_t n, const SeedSpec& seed,
                              const SampleVisitor& visit) {
  const ConjugatePosterior posterior(model, y);
  RandomStream rng(seed);
  SampleDiagnostics diag;
  diag.kind = SamplerKind::ExactConjugate;
  MomentAccumulator moments;
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor x = posterior.draw(rng, &diag.max_imag_residue);
    moments.add(x);
    visit(i, x);
  }
  moments.finish(diag);
  return diag;
}

SampleDiagnostics visit_ula(const BayesianModel& model, const Tensor& y, std::size_t n,
                            const SamplerConfig& config, const SeedSpec& seed, const SampleVisitor& visit) {
  const double lipschitz = posterior_lipschitz_bound(model);
  const double gamma = config.step_scale / lipschitz;
  const double noise_scale = std::sqrt(2.0 * gamma);

  SampleDiagnostics diag;
  diag.kind = SamplerKind::Ula;
  diag.lipschitz = lipschitz;
  diag.step_size = gamma;
  diag.step_within_bound = gamma * lipschitz <= 1.0;

  Tensor x = model.op().apply_adjoint(y);
  const double limit = 1e6 * norm(x.values()) + 1e6;
  RandomStream rng(seed);
  MomentAccumulator moments;

  std::vector<double> next(x.size());
  const std::size_t total = config.burn_in + n * config.thinning;
  std::size_t kept = 0;
  for (std::size_t step = 1; step <= total; ++step) {
    const Tensor g = grad_log_posterior(model, y, x);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = x[i] + gamma * g[i] + noise_scale * rng.normal();
    double sq = 0.0;
    for (double v : next) {
      if (!std::isfinite(v))
        fail(ErrorKind::Divergence, "ULA chain produced a non-finite state at step " + std::to_string(step));
      sq += v * v;
    }
    if (std::sqrt(sq) > limit)
      fail(ErrorKind::Divergence, "ULA chain diverged at step " + std::to_string(step));
    x = Tensor(x.shape(), next);
    if (step > config.burn_in && (step - config.burn_in) % config.thinning == 0) {
      moments.add(x);
      visit(kept++, x);
    }
  }
  moments.finish(diag);
  return diag;
}

}  // namespace

SampleDiagnostics visit_posterior_samples(const BayesianModel& model, const Tensor& y, std::size_t n,
                                          const SamplerConfig& config, const SeedSpec& seed,
                                          const SampleVisitor& visit) {
  check_config(config);
  switch (config.kind) {
    case SamplerKind::ExactConjugate: return visit_exact(model, y, n, seed, visit);
    case SamplerKind::Ula: return visit_ula(model, y, n, config, seed, visit);
  }
  fail(ErrorKind::Unsupported, "unknown sampler kind");
}

namespace {

SampleSet collect(const BayesianModel& model, const Tensor& y, std::size_t n, const SamplerConfig& config,
                  const SeedSpec& seed) {
  SampleSet set;
  set.model_label = model.label;
  set.samples.reserve(n);
  set.diagnostics = visit_posterior_samples(model, y, n, config, seed,
                                            [&](std::size_t, const Tensor& x) { set.samples.push_back(x); });
  return set;
}

}  // namespace

SampleSet sample_exact(const BayesianModel& model, const Tensor& y, std::size_t n, const SeedSpec& seed) {
  SamplerConfig config;
  config.kind = SamplerKind::ExactConjugate;
  return collect(model, y, n, config, seed);
}

SampleSet sample_ula(const BayesianModel& model, const Tensor& y, std::size_t n, const SamplerConfig& config,
                     const SeedSpec& seed) {
  SamplerConfig c = config;
  c.kind = SamplerKind::Ula;
  return collect(model, y, n, c, seed);
}

SampleSet sample_posterior(const BayesianModel& model, const Tensor& y, std::size_t n,
                           const SamplerConfig& config, const SeedSpec& seed) {
  return collect(model, y, n, config, seed);
}

}  // namespace splitcv
