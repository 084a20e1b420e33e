#include "core/scoring.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/fission.hpp"
#include "core/parallel.hpp"

namespace splitcv {

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::Phi1: return "phi1";
    case Metric::Phi2: return "phi2";
    case Metric::Phi3: return "phi3";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  if (name == "phi1") return Metric::Phi1;
  if (name == "phi2") return Metric::Phi2;
  if (name == "phi3" || name == "phi3_log") return Metric::Phi3;
  fail(ErrorKind::InvalidParameter, "unknown metric '" + name + "'");
}

// ---- Embedding ------------------------------------------------------------

Embedding Embedding::identity() { return Embedding{}; }

Embedding Embedding::pyramid(std::size_t levels) {
  require(levels >= 1, ErrorKind::InvalidParameter, "pyramid embedding needs at least one level");
  Embedding e;
  e.kind_ = Kind::Pyramid;
  e.levels_ = levels;
  return e;
}

Embedding Embedding::external(Tensor features) {
  require(features.ndim() >= 2, ErrorKind::Dimension, "external embeddings must be stacked as [count, ...]");
  Embedding e;
  e.kind_ = Kind::External;
  e.table_ = std::make_shared<const Tensor>(std::move(features));
  return e;
}

Embedding Embedding::external_from_file(const std::filesystem::path& path) {
  return external(read_tensor(path));
}

namespace {

Tensor pyramid_features(const Tensor& x, std::size_t levels) {
  require(x.ndim() == 1 || x.ndim() == 2, ErrorKind::Unsupported, "pyramid embedding needs a 1-D or 2-D tensor");
  const std::size_t h = x.ndim() == 2 ? x.shape()[0] : 1;
  const std::size_t w = x.shape().back();
  std::vector<double> out;
  for (std::size_t level = 0; level < levels; ++level) {
    const std::size_t scale = std::size_t{1} << level;
    const std::size_t sh = x.ndim() == 2 ? scale : 1;
    const std::size_t bh = h / sh, bw = w / scale;
    require(bh >= 1 && bw >= 1, ErrorKind::Dimension,
            "pyramid level " + std::to_string(level) + " is coarser than the image");
    const double inv = 1.0 / static_cast<double>(sh * scale);
    for (std::size_t bi = 0; bi < bh; ++bi) {
      for (std::size_t bj = 0; bj < bw; ++bj) {
        double sum = 0.0;
        for (std::size_t i = 0; i < sh; ++i)
          for (std::size_t j = 0; j < scale; ++j) sum += x[(bi * sh + i) * w + bj * scale + j];
        out.push_back(sum * inv / static_cast<double>(scale));
      }
    }
  }
  const auto n = out.size();
  return Tensor({n}, std::move(out));
}

}  // namespace

Tensor Embedding::operator()(const Tensor& x, std::size_t sample_index) const {
  switch (kind_) {
    case Kind::Identity:
      return x.reshaped({x.size()});
    case Kind::Pyramid:
      return pyramid_features(x, levels_);
    case Kind::External: {
      if (sample_index >= table_->shape()[0])
        fail(ErrorKind::Lookup, "no external embedding for sample " + std::to_string(sample_index) + " (table has " +
                                    std::to_string(table_->shape()[0]) + " rows)");
      const Tensor row = unstack(*table_, sample_index);
      return row.reshaped({row.size()});
    }
  }
  return x;
}

Tensor embed(const Embedding& embedding, const Tensor& x) { return embedding(x); }

// ---- LogMeanExp -----------------------------------------------------------

void LogMeanExp::add(double log_value) {
  ++count_;
  if (log_value == -std::numeric_limits<double>::infinity()) return;
  if (log_value > max_) {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - log_value) + 1.0;
    max_ = log_value;
  } else {
    scaled_sum_ += std::exp(log_value - max_);
  }
}

void LogMeanExp::merge(const LogMeanExp& other) {
  if (other.scaled_sum_ > 0.0) {
    if (other.max_ > max_) {
      scaled_sum_ = scaled_sum_ * std::exp(max_ - other.max_) + other.scaled_sum_;
      max_ = other.max_;
    } else {
      scaled_sum_ += other.scaled_sum_ * std::exp(other.max_ - max_);
    }
  }
  count_ += other.count_;
}

double LogMeanExp::log_sum() const {
  if (scaled_sum_ == 0.0) return -std::numeric_limits<double>::infinity();
  return max_ + std::log(scaled_sum_);
}

double LogMeanExp::value() const { return log_sum() - std::log(static_cast<double>(count_)); }

// ---- estimators -------------------------------------------------------------

BayesianModel with_noise_sigma(const BayesianModel& model, double sigma) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter, "noise sigma must be positive");
  BayesianModel out = model;
  out.likelihood.sigma = sigma;
  return out;
}

SeedSpec minus_chain_seed(const SeedSpec& base, std::size_t k) { return base.child({2, k}); }
SeedSpec plus_chain_seed(const SeedSpec& base, std::size_t k) { return base.child({3, k}); }

double ScoreReport::value() const {
  switch (metric) {
    case Metric::Phi1: return phi1.value_or(std::nan(""));
    case Metric::Phi2: return phi2.value_or(std::nan(""));
    case Metric::Phi3: return phi3_log.value_or(std::nan(""));
  }
  return std::nan("");
}

namespace {

void validate(Metric metric, const BayesianModel& model, const Tensor& y, const ScoreParams& params) {
  c_alpha(params.alpha);
  require(params.k_realizations >= 1, ErrorKind::InvalidParameter, "K must be >= 1");
  require(params.n_samples >= 1, ErrorKind::InvalidParameter, "N must be >= 1");
  if (metric == Metric::Phi2) require(params.l_samples >= 1, ErrorKind::InvalidParameter, "L must be >= 1");
  require(y.shape() == model.op().output_shape(), ErrorKind::Dimension,
          "measurement " + shape_to_string(y.shape()) + " does not match operator output " +
              shape_to_string(model.op().output_shape()));
}

using RealizationFn = std::function<double(std::size_t k, const FissionPair& pair)>;

ScoreReport run_realizations(Metric metric, const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                             const ScoreHooks& hooks, const RealizationFn& realization) {
  validate(metric, model, y, params);
  ScoreReport report;
  report.model_label = model.label;
  report.metric = metric;
  report.k_realizations = params.k_realizations;
  report.n_samples = params.n_samples;
  report.l_samples = metric == Metric::Phi2 ? params.l_samples : 0;
  report.alpha = params.alpha;
  report.seed = params.seed;
  report.partials.assign(params.k_realizations, 0.0);

  parallel_for_ordered(
      params.k_realizations, params.threads,
      [&](std::size_t k) {
        if (auto it = hooks.resume.find(k); it != hooks.resume.end()) {
          report.partials[k] = it->second;
          return;
        }
        const auto pair = split(y, model.sigma(), params.alpha, realization_noise_seed(params.seed, k));
        try {
          report.partials[k] = realization(k, pair);
        } catch (const Error& e) {
          throw Error(e.kind(), "realization k=" + std::to_string(k) + ": " + e.what());
        }
      },
      [&](std::size_t k) {
        if (hooks.on_realization) hooks.on_realization(k, report.partials[k]);
      });
  return report;
}

}  // namespace

ScoreReport phi1(const BayesianModel& model, const Tensor& y, const ScoreParams& params, const ScoreHooks& hooks) {
  const auto minus_model = with_noise_sigma(model, model.sigma() / std::sqrt(params.alpha));
  auto report = run_realizations(Metric::Phi1, model, y, params, hooks, [&](std::size_t k, const FissionPair& pair) {
    double sum = 0.0;
    visit_posterior_samples(minus_model, pair.y_minus, params.n_samples, params.sampler,
                            minus_chain_seed(params.seed, k), [&](std::size_t n, const Tensor& x) {
                              sum += residual_norm_sq(model.likelihood, pair.y_plus, model.op().apply(x));
                              if (hooks.on_sample) hooks.on_sample(k * params.n_samples + n, x);
                            });
    return sum;
  });
  double total = 0.0;
  for (double p : report.partials) total += p;
  report.phi1 = total / static_cast<double>(params.k_realizations * params.n_samples);
  return report;
}

ScoreReport phi2(const BayesianModel& model, const Tensor& y, const ScoreParams& params, const ScoreHooks& hooks) {
  const auto minus_model = with_noise_sigma(model, model.sigma() / std::sqrt(params.alpha));
  const auto plus_model = with_noise_sigma(model, model.sigma() / std::sqrt(1.0 - params.alpha));
  const std::size_t stride = params.n_samples + params.l_samples;
  auto report = run_realizations(Metric::Phi2, model, y, params, hooks, [&](std::size_t k, const FissionPair& pair) {
    std::vector<Tensor> minus_features, plus_features;
    minus_features.reserve(params.n_samples);
    plus_features.reserve(params.l_samples);
    visit_posterior_samples(minus_model, pair.y_minus, params.n_samples, params.sampler,
                            minus_chain_seed(params.seed, k), [&](std::size_t n, const Tensor& x) {
                              const std::size_t index = k * stride + n;
                              minus_features.push_back(params.embedding(x, index));
                              if (hooks.on_sample) hooks.on_sample(index, x);
                            });
    visit_posterior_samples(plus_model, pair.y_plus, params.l_samples, params.sampler,
                            plus_chain_seed(params.seed, k), [&](std::size_t l, const Tensor& x) {
                              const std::size_t index = k * stride + params.n_samples + l;
                              plus_features.push_back(params.embedding(x, index));
                              if (hooks.on_sample) hooks.on_sample(index, x);
                            });
    double sum = 0.0;
    for (const auto& a : minus_features) {
      for (const auto& b : plus_features) {
        require(a.size() == b.size(), ErrorKind::Dimension, "embedding dimensions differ between samples");
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        sum += std::sqrt(d2);
      }
    }
    return sum;
  });
  double total = 0.0;
  for (double p : report.partials) total += p;
  report.phi2 =
      total / static_cast<double>(params.k_realizations * params.n_samples * params.l_samples);
  return report;
}

ScoreReport phi3_log(const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                     const ScoreHooks& hooks) {
  const auto minus_model = with_noise_sigma(model, model.sigma() / std::sqrt(params.alpha));
  const double plus_sigma = model.sigma() / std::sqrt(1.0 - params.alpha);
  const std::size_t m = measured_count(model.likelihood);
  auto report = run_realizations(Metric::Phi3, model, y, params, hooks, [&](std::size_t k, const FissionPair& pair) {
    LogMeanExp acc;
    visit_posterior_samples(minus_model, pair.y_minus, params.n_samples, params.sampler,
                            minus_chain_seed(params.seed, k), [&](std::size_t n, const Tensor& x) {
                              const double r2 = residual_norm_sq(model.likelihood, pair.y_plus, model.op().apply(x));
                              acc.add(gaussian_log_density(r2, m, plus_sigma));
                              if (hooks.on_sample) hooks.on_sample(k * params.n_samples + n, x);
                            });
    return acc.log_sum();
  });
  double peak = -std::numeric_limits<double>::infinity();
  for (double p : report.partials) peak = std::max(peak, p);
  if (!std::isfinite(peak))
    fail(ErrorKind::Numerical, "predictive density underflowed for every realization");
  double sum = 0.0;
  for (double p : report.partials) sum += std::exp(p - peak);
  report.phi3_log =
      peak + std::log(sum) - std::log(static_cast<double>(params.k_realizations * params.n_samples));
  return report;
}

ScoreReport score(Metric metric, const BayesianModel& model, const Tensor& y, const ScoreParams& params,
                  const ScoreHooks& hooks) {
  switch (metric) {
    case Metric::Phi1: return phi1(model, y, params, hooks);
    case Metric::Phi2: return phi2(model, y, params, hooks);
    case Metric::Phi3: return phi3_log(model, y, params, hooks);
  }
  fail(ErrorKind::InvalidParameter, "unknown metric");
}

}  // namespace splitcv
