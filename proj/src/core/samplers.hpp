#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/models.hpp"
#include "core/rng.hpp"

namespace splitcv {

enum class SamplerKind { ExactConjugate, Ula };

const char* to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::ExactConjugate;
  std::size_t burn_in = 200;
  std::size_t thinning = 20;
  double step_scale = 0.9;  // ULA step = step_scale / posterior Lipschitz bound
};

struct SampleDiagnostics {
  SamplerKind kind = SamplerKind::ExactConjugate;
  double step_size = 0.0;       // ULA only
  double lipschitz = 0.0;       // ULA only
  bool step_within_bound = true;
  double max_imag_residue = 0.0;  // exact sampler only
  Tensor mean;
  Tensor variance;
};

struct SampleSet {
  std::vector<Tensor> samples;
  std::string model_label;
  std::string measurement_id;
  SampleDiagnostics diagnostics;

  // Leading dimension N.
  Tensor stacked() const;
};

// Exact posterior of an iid-Gaussian-prior model with a Fourier-diagonal
// operator. Per unitary frequency i:
//   v_i = (|d_i|^2 / sigma^2 + 1 / sigma_x^2)^-1,  m_i = v_i (F A^T y)_i / sigma^2.
class ConjugatePosterior {
 public:
  ConjugatePosterior(const BayesianModel& model, const Tensor& y);

  const Tensor& mean() const noexcept { return mean_; }
  // Posterior variance of each unitary Fourier coefficient.
  const std::vector<double>& fourier_variance() const noexcept { return variance_hat_; }

  // One exact draw. `max_imag`, when given, is raised to the largest
  // imaginary residue discarded by the inverse transform.
  Tensor draw(RandomStream& rng, double* max_imag = nullptr) const;

 private:
  Shape shape_;
  bool pixel_domain_ = false;  // identity operator: posterior is iid per pixel
  Tensor mean_;
  std::vector<Complex> mean_hat_;
  std::vector<double> variance_hat_;
  std::vector<double> sd_hat_;
};

bool is_conjugate(const BayesianModel& model);

using SampleVisitor = std::function<void(std::size_t index, const Tensor& sample)>;

// Streams N posterior draws conditioned on y without storing them. All
// sampler randomness comes from `seed`.
SampleDiagnostics visit_posterior_samples(const BayesianModel& model, const Tensor& y, std::size_t n,
                                          const SamplerConfig& config, const SeedSpec& seed,
                                          const SampleVisitor& visit);

SampleSet sample_exact(const BayesianModel& model, const Tensor& y, std::size_t n, const SeedSpec& seed);
SampleSet sample_ula(const BayesianModel& model, const Tensor& y, std::size_t n, const SamplerConfig& config,
                     const SeedSpec& seed);
SampleSet sample_posterior(const BayesianModel& model, const Tensor& y, std::size_t n,
                           const SamplerConfig& config, const SeedSpec& seed);

}  // namespace splitcv
