#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/models.hpp"
#include "core/rng.hpp"
#include "core/samplers.hpp"

namespace splitcv {

enum class Metric { Phi1, Phi2, Phi3 };

const char* to_string(Metric metric);
Metric parse_metric(const std::string& name);

// Feature map rho used by the posterior rule.
class Embedding {
 public:
  enum class Kind { Identity, Pyramid, External };

  static Embedding identity();
  // Block means at scales 1, 2, ..., 2^(levels-1), each divided by its scale.
  static Embedding pyramid(std::size_t levels);
  // Precomputed features, one row per sample index: shape [count, ...].
  static Embedding external(Tensor features);
  static Embedding external_from_file(const std::filesystem::path& path);

  Kind kind() const noexcept { return kind_; }
  std::size_t levels() const noexcept { return levels_; }

  // Feature vector of x; External embeddings look the row up by sample index.
  Tensor operator()(const Tensor& x, std::size_t sample_index = 0) const;

 private:
  Kind kind_ = Kind::Identity;
  std::size_t levels_ = 1;
  std::shared_ptr<const Tensor> table_;
};

Tensor embed(const Embedding& embedding, const Tensor& x);

// Numerically stable running log of the mean of exp(values).
class LogMeanExp {
 public:
  void add(double log_value);
  void merge(const LogMeanExp& other);
  double log_sum() const;
  double value() const;  // log_sum - log(count)
  std::size_t count() const noexcept { return count_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_sum_ = 0.0;
  std::size_t count_ = 0;
};

// Model with the same prior and operator but noise std `sigma`: the law of
// a split half (sigma/sqrt(alpha) for y-, sigma/sqrt(1-alpha) for y+).
BayesianModel with_noise_sigma(const BayesianModel& model, double sigma);

struct ScoreParams {
  double alpha = 0.5;
  std::size_t k_realizations = 10;
  std::size_t n_samples = 100;
  std::size_t l_samples = 20;
  SamplerConfig sampler;
  Embedding embedding = Embedding::identity();
  SeedSpec seed;
  unsigned threads = 1;
};

// Optional callbacks. `on_realization` fires in increasing k once every
// realization up to k is complete. `resume` supplies partial sums computed
// by an earlier run; those realizations are not recomputed. `on_sample`
// receives every posterior draw with its global index:
//   x-_{k,n} -> k (N + L') + n,   x+_{k,l} -> k (N + L') + N + l,
// where L' = L for phi2 and 0 otherwise. It may be called concurrently.
struct ScoreHooks {
  std::function<void(std::size_t k, double partial)> on_realization;
  std::map<std::size_t, double> resume;
  std::function<void(std::size_t index, const Tensor& sample)> on_sample;
};

struct ScoreReport {
  std::string model_label;
  Metric metric = Metric::Phi1;
  std::optional<double> phi1;
  std::optional<double> phi2;
  std::optional<double> phi3_log;
  std::size_t k_realizations = 0;
  std::size_t n_samples = 0;
  std::size_t l_samples = 0;
  double alpha = 0.0;
  SeedSpec seed;
  // phi1: sum_n |y+ - A x|^2;  phi2: sum_{n,l} |rho(x-) - rho(x+)|;
  // phi3: log sum_n p(y+ | x)
  std::vector<double> partials;

  double value() const;
};

// Mean squared residual of y+ against posterior draws given y- (lower is better).
ScoreReport phi1(const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                 const ScoreHooks& hooks = {});
// Mean embedded distance between draws given y- and draws given y+.
ScoreReport phi2(const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                 const ScoreHooks& hooks = {});
// log of the Monte Carlo predictive density of y+ given y- (higher is better).
ScoreReport phi3_log(const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                     const ScoreHooks& hooks = {});

ScoreReport score(Metric metric, const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                  const ScoreHooks& hooks = {});

SeedSpec minus_chain_seed(const SeedSpec& base, std::size_t k);
SeedSpec plus_chain_seed(const SeedSpec& base, std::size_t k);

}  // namespace splitcv
