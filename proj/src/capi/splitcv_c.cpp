#include "splitcv/splitcv.h"

#include <cstring>
#include <fstream>
#include <string>

#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/fission.hpp"
#include "core/gaussian_oracle.hpp"
#include "core/linops.hpp"
#include "core/models.hpp"
#include "core/report.hpp"
#include "core/samplers.hpp"
#include "core/scoring.hpp"
#include "core/tensor.hpp"

using namespace splitcv;

struct scv_tensor {
  Tensor t;
};
struct scv_operator {
  std::shared_ptr<const LinearOperator> op;
};
struct scv_model {
  BayesianModel m;
};
struct scv_report {
  ScoreReport r;
};

namespace {

thread_local std::string g_last_error;
thread_local std::int64_t g_last_offset = -1;

scv_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return SCV_ERR_INVALID_ARGUMENT;
    case ErrorKind::Dimension: return SCV_ERR_DIMENSION;
    case ErrorKind::Format: return SCV_ERR_FORMAT;
    case ErrorKind::Io: return SCV_ERR_IO;
    case ErrorKind::Unsupported: return SCV_ERR_UNSUPPORTED;
    case ErrorKind::Numerical: return SCV_ERR_NUMERICAL;
    case ErrorKind::Divergence: return SCV_ERR_DIVERGENCE;
    case ErrorKind::Calibration: return SCV_ERR_CALIBRATION;
    case ErrorKind::Lookup: return SCV_ERR_LOOKUP;
  }
  return SCV_ERR_INTERNAL;
}

scv_status set_error(scv_status status, std::string message, std::int64_t offset = -1) {
  g_last_error = std::move(message);
  g_last_offset = offset;
  return status;
}

template <typename F>
scv_status guarded(F&& f) {
  try {
    f();
    return SCV_OK;
  } catch (const FormatError& e) {
    return set_error(SCV_ERR_FORMAT, e.what(), static_cast<std::int64_t>(e.offset()));
  } catch (const Error& e) {
    return set_error(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SCV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SCV_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SCV_ERR_INTERNAL, "unknown error");
  }
}

#define SCV_REQUIRE_NONNULL(p)                                                        \
  do {                                                                                \
    if ((p) == nullptr) return set_error(SCV_ERR_NULL_ARGUMENT, #p " must not be NULL"); \
  } while (0)

SeedSpec to_seed(const scv_seed& s) {
  SeedSpec out{s.master_seed, {}};
  if (s.path_len > 0) {
    require(s.path != nullptr, ErrorKind::InvalidParameter, "seed path is NULL but path_len > 0");
    out.stream_path.assign(s.path, s.path + s.path_len);
  }
  return out;
}

Shape to_shape(const size_t* shape, size_t ndim) {
  require(shape != nullptr || ndim == 0, ErrorKind::InvalidParameter, "shape is NULL");
  return Shape(shape, shape + ndim);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

scv_tensor* wrap(Tensor t) { return new scv_tensor{std::move(t)}; }

Prior prior_from(const scv_model_config& c) {
  const std::string kind = c.prior ? c.prior : "gaussian";
  if (kind == "gaussian") {
    require(std::isfinite(c.sigma_x) && c.sigma_x > 0, ErrorKind::InvalidParameter, "sigma_x must be positive");
    return IidGaussianPrior{c.sigma_x};
  }
  if (kind == "tv") {
    require(std::isfinite(c.lambda) && c.lambda > 0, ErrorKind::InvalidParameter, "lambda must be positive");
    require(std::isfinite(c.epsilon) && c.epsilon > 0, ErrorKind::InvalidParameter, "epsilon must be positive");
    return CharbonnierTvPrior{c.lambda, c.epsilon};
  }
  fail(ErrorKind::InvalidParameter, "unknown prior '" + kind + "' (expected gaussian or tv)");
}

SamplerConfig sampler_from(const scv_sampler_config& c) {
  SamplerConfig out;
  out.kind = parse_sampler_kind(c.kind ? c.kind : "exact");
  out.burn_in = c.burn_in;
  out.thinning = c.thinning;
  out.step_scale = c.step_scale;
  require(out.thinning >= 1, ErrorKind::InvalidParameter, "thinning must be >= 1");
  require(std::isfinite(out.step_scale) && out.step_scale > 0, ErrorKind::InvalidParameter,
          "step_scale must be positive");
  return out;
}

ScoreParams params_from(const scv_score_config& c) {
  ScoreParams p;
  p.alpha = c.alpha;
  p.k_realizations = c.k_realizations;
  p.n_samples = c.n_samples;
  p.l_samples = c.l_samples;
  p.sampler = sampler_from(c.sampler);
  const std::string emb = c.embedding ? c.embedding : "identity";
  if (emb == "identity") {
    p.embedding = Embedding::identity();
  } else if (emb == "pyramid") {
    p.embedding = Embedding::pyramid(c.embedding_levels);
  } else if (emb == "external") {
    require(c.embedding_path != nullptr, ErrorKind::InvalidParameter, "external embedding needs a file");
    p.embedding = Embedding::external_from_file(c.embedding_path);
  } else {
    fail(ErrorKind::InvalidParameter, "unknown embedding '" + emb + "'");
  }
  p.seed = to_seed(c.seed);
  p.threads = c.threads;
  return p;
}

Metric metric_from(const scv_score_config& c) { return parse_metric(c.metric ? c.metric : "phi1"); }

std::vector<Tensor> gather(const scv_tensor* const* items, size_t n, const char* what) {
  require(items != nullptr || n == 0, ErrorKind::InvalidParameter, std::string(what) + " list is NULL");
  std::vector<Tensor> out;
  for (size_t i = 0; i < n; ++i) {
    require(items[i] != nullptr, ErrorKind::InvalidParameter, std::string(what) + " item is NULL");
    out.push_back(items[i]->t);
  }
  return out;
}

}  // namespace

extern "C" {

const char* scv_version(void) { return version(); }

const char* scv_status_name(scv_status status) {
  switch (status) {
    case SCV_OK: return "ok";
    case SCV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SCV_ERR_DIMENSION: return "dimension";
    case SCV_ERR_FORMAT: return "format";
    case SCV_ERR_IO: return "io";
    case SCV_ERR_UNSUPPORTED: return "unsupported";
    case SCV_ERR_NUMERICAL: return "numerical";
    case SCV_ERR_DIVERGENCE: return "divergence";
    case SCV_ERR_CALIBRATION: return "calibration";
    case SCV_ERR_LOOKUP: return "lookup";
    case SCV_ERR_NULL_ARGUMENT: return "null_argument";
    case SCV_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* scv_last_error(void) { return g_last_error.c_str(); }
int64_t scv_last_error_offset(void) { return g_last_offset; }
void scv_string_free(char* s) { std::free(s); }

// ---- tensors

scv_status scv_tensor_create(const size_t* shape, size_t ndim, const double* data, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    Shape s = to_shape(shape, ndim);
    const std::size_t n = shape_size(s);
    require(data != nullptr || n == 0, ErrorKind::InvalidParameter, "data is NULL");
    *out = wrap(Tensor(std::move(s), std::vector<double>(data, data + n)));
  });
}

void scv_tensor_free(scv_tensor* t) { delete t; }
size_t scv_tensor_ndim(const scv_tensor* t) { return t ? t->t.ndim() : 0; }
const size_t* scv_tensor_shape(const scv_tensor* t) { return t ? t->t.shape().data() : nullptr; }
size_t scv_tensor_size(const scv_tensor* t) { return t ? t->t.size() : 0; }
const double* scv_tensor_data(const scv_tensor* t) { return t ? t->t.values().data() : nullptr; }

scv_status scv_tensor_read(const char* path, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(path);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, std::string("cannot open '") + path + "'");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.close();
    if (magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '6')
      *out = wrap(read_pgm(path));
    else
      *out = wrap(read_tensor(path));
  });
}

scv_status scv_tensor_write(const scv_tensor* t, const char* path) {
  SCV_REQUIRE_NONNULL(t);
  SCV_REQUIRE_NONNULL(path);
  return guarded([&] { write_tensor(path, t->t); });
}

scv_status scv_tensor_write_pgm(const scv_tensor* t, const char* path) {
  SCV_REQUIRE_NONNULL(t);
  SCV_REQUIRE_NONNULL(path);
  return guarded([&] { write_pgm(path, t->t); });
}

scv_status scv_tensor_decode(const unsigned char* bytes, size_t len, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(out);
  if (bytes == nullptr && len > 0) return set_error(SCV_ERR_NULL_ARGUMENT, "bytes must not be NULL");
  return guarded([&] { *out = wrap(decode_ft64({bytes, len})); });
}

scv_status scv_tensor_unstack(const scv_tensor* stacked, size_t index, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(stacked);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = wrap(unstack(stacked->t, index)); });
}

// ---- fission

scv_status scv_split(const scv_tensor* y, double sigma, double alpha, scv_seed seed, scv_tensor** y_plus,
                     scv_tensor** y_minus, scv_tensor** w) {
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(y_plus);
  SCV_REQUIRE_NONNULL(y_minus);
  return guarded([&] {
    auto pair = split(y->t, sigma, alpha, to_seed(seed));
    *y_plus = wrap(std::move(pair.y_plus));
    *y_minus = wrap(std::move(pair.y_minus));
    if (w) *w = wrap(std::move(pair.w));
  });
}

scv_status scv_recombine(const scv_tensor* y_plus, const scv_tensor* y_minus, double alpha, scv_tensor** y) {
  SCV_REQUIRE_NONNULL(y_plus);
  SCV_REQUIRE_NONNULL(y_minus);
  SCV_REQUIRE_NONNULL(y);
  return guarded([&] {
    c_alpha(alpha);
    require(y_plus->t.shape() == y_minus->t.shape(), ErrorKind::Dimension, "halves differ in shape");
    *y = wrap((1.0 - alpha) * y_plus->t + alpha * y_minus->t);
  });
}

// ---- operators

scv_status scv_operator_identity(const size_t* shape, size_t ndim, scv_operator** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    *out = new scv_operator{std::make_shared<const LinearOperator>(LinearOperator::identity(to_shape(shape, ndim)))};
  });
}

scv_status scv_operator_blur(const char* family, const double* params, size_t n_params, size_t support,
                             const size_t* image_shape, size_t ndim, scv_operator** out) {
  SCV_REQUIRE_NONNULL(family);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    require(params != nullptr || n_params == 0, ErrorKind::InvalidParameter, "params is NULL");
    const auto kernel = make_kernel(parse_kernel_family(family), std::span<const double>(params, n_params), support);
    *out = new scv_operator{
        std::make_shared<const LinearOperator>(LinearOperator::circulant(kernel.values, to_shape(image_shape, ndim)))};
  });
}

scv_status scv_operator_mri(const size_t* image_shape, size_t ndim, double acceleration, double center_fraction,
                            scv_seed seed, scv_operator** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    *out = new scv_operator{std::make_shared<const LinearOperator>(
        make_mri_mask(to_shape(image_shape, ndim), acceleration, center_fraction, to_seed(seed)))};
  });
}

void scv_operator_free(scv_operator* op) { delete op; }

scv_status scv_operator_apply(const scv_operator* op, const scv_tensor* x, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(op);
  SCV_REQUIRE_NONNULL(x);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = wrap(op->op->apply(x->t)); });
}

scv_status scv_operator_adjoint(const scv_operator* op, const scv_tensor* y, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(op);
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = wrap(op->op->apply_adjoint(y->t)); });
}

scv_status scv_operator_spectral_norm_sq(const scv_operator* op, double* out) {
  SCV_REQUIRE_NONNULL(op);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = op->op->spectral_norm_sq(); });
}

// ---- models

void scv_model_config_default(scv_model_config* config) {
  if (!config) return;
  *config = scv_model_config{"gaussian", 1.0, 10.0, 0.01, 1.0, 0, nullptr};
}

scv_status scv_model_create(const scv_operator* op, const scv_model_config* config, scv_model** out) {
  SCV_REQUIRE_NONNULL(op);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    std::optional<ValidMask> valid;
    if (config->valid_border > 0) valid = ValidMask{config->valid_border};
    *out = new scv_model{
        make_model(prior_from(*config), op->op, config->sigma, valid, config->label ? config->label : "")};
  });
}

scv_status scv_kernel_models(const char* const* specs, size_t n_specs, const size_t* image_shape, size_t ndim,
                             const scv_model_config* config, scv_model** out) {
  SCV_REQUIRE_NONNULL(specs);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    std::vector<KernelSpec> kernels;
    for (size_t i = 0; i < n_specs; ++i) {
      require(specs[i] != nullptr, ErrorKind::InvalidParameter, "kernel spec is NULL");
      kernels.push_back(parse_kernel_spec(specs[i]));
    }
    auto models = kernel_candidates(kernels, to_shape(image_shape, ndim), prior_from(*config), config->sigma);
    for (size_t i = 0; i < models.size(); ++i) out[i] = new scv_model{std::move(models[i])};
  });
}

void scv_model_free(scv_model* model) { delete model; }
const char* scv_model_label(const scv_model* model) { return model ? model->m.label.c_str() : ""; }

// ---- sampling

void scv_sampler_config_default(scv_sampler_config* config) {
  if (!config) return;
  const SamplerConfig d;
  *config = scv_sampler_config{"exact", d.burn_in, d.thinning, d.step_scale};
}

scv_status scv_sample(const scv_model* model, const scv_tensor* y, size_t n, const scv_sampler_config* config,
                      scv_seed seed, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(model);
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const auto set = sample_posterior(model->m, y->t, n, sampler_from(*config), to_seed(seed));
    *out = wrap(set.stacked());
  });
}

// ---- scoring

void scv_score_config_default(scv_score_config* config) {
  if (!config) return;
  const ScoreParams d;
  std::memset(config, 0, sizeof *config);
  config->metric = "phi1";
  config->alpha = d.alpha;
  config->k_realizations = d.k_realizations;
  config->n_samples = d.n_samples;
  config->l_samples = d.l_samples;
  scv_sampler_config_default(&config->sampler);
  config->embedding = "identity";
  config->embedding_levels = 1;
  config->threads = 1;
}

scv_status scv_score(const scv_model* model, const scv_tensor* y, const scv_score_config* config, scv_report** out) {
  SCV_REQUIRE_NONNULL(model);
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const ScoreParams params = params_from(*config);
    ScoreHooks hooks;
    if (config->resume_count > 0) {
      require(config->resume_k && config->resume_partials, ErrorKind::InvalidParameter, "resume arrays are NULL");
      for (size_t i = 0; i < config->resume_count; ++i) {
        require(config->resume_k[i] < params.k_realizations, ErrorKind::InvalidParameter,
                "resumed realization " + std::to_string(config->resume_k[i]) + " is beyond K");
        hooks.resume[config->resume_k[i]] = config->resume_partials[i];
      }
    }
    if (config->on_partial) {
      hooks.on_realization = [config](std::size_t k, double partial) { config->on_partial(config->user, k, partial); };
    }
    if (config->on_sample) {
      hooks.on_sample = [config](std::size_t index, const Tensor& x) {
        const scv_tensor view{x};
        config->on_sample(config->user, index, &view);
      };
    }
    *out = new scv_report{score(metric_from(*config), model->m, y->t, params, hooks)};
  });
}

void scv_report_free(scv_report* report) { delete report; }
double scv_report_value(const scv_report* report) { return report ? report->r.value() : std::nan(""); }

size_t scv_report_partials(const scv_report* report, const double** partials) {
  if (!report) return 0;
  if (partials) *partials = report->r.partials.data();
  return report->r.partials.size();
}

scv_status scv_report_csv(const scv_report* report, char** out) {
  SCV_REQUIRE_NONNULL(report);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = dup_string(score_csv(std::span<const ScoreReport>(&report->r, 1))); });
}

scv_status scv_report_json(const scv_report* report, char** out) {
  SCV_REQUIRE_NONNULL(report);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = dup_string(score_report_json(report->r)); });
}

// ---- oracle

scv_status scv_oracle_log_predictive(size_t m, double sigma, double sigma_x, const double* y, const double* w,
                                     double alpha, double* out) {
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(w);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const ToyModel toy{m, sigma, sigma_x};
    toy.validate();
    *out = log_predictive(toy, Tensor({m}, std::vector<double>(y, y + m)), Tensor({m}, std::vector<double>(w, w + m)),
                          alpha);
  });
}

scv_status scv_oracle_quadrature_predictive(double sigma, double sigma_x, double y, double w, double alpha,
                                            double* out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    *out = quadrature_predictive(ToyModel{1, sigma, sigma_x}, Tensor({1}, {y}), Tensor({1}, {w}), alpha);
  });
}

scv_status scv_oracle_log_marginal(size_t m, double sigma, double sigma_x, const double* y, double* out) {
  SCV_REQUIRE_NONNULL(y);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const ToyModel toy{m, sigma, sigma_x};
    toy.validate();
    *out = log_marginal(toy, Tensor({m}, std::vector<double>(y, y + m)));
  });
}

scv_status scv_toy_population(size_t m, double sigma, double sigma_x, size_t count, scv_seed seed, scv_tensor** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    auto items = toy_population(ToyModel{m, sigma, sigma_x}, count, to_seed(seed));
    for (size_t i = 0; i < items.size(); ++i) out[i] = wrap(std::move(items[i]));
  });
}

scv_status scv_toy_model(size_t m, double sigma, double sigma_x, scv_model** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] { *out = new scv_model{toy_bayesian_model(ToyModel{m, sigma, sigma_x})}; });
}

scv_status scv_convergence_csv(const scv_convergence_config* config, char** out) {
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    ConvergenceStudy study;
    study.sigma = config->sigma;
    study.sigma_x = config->sigma_x;
    require(config->alphas && config->n_alphas > 0, ErrorKind::InvalidParameter, "at least one alpha is required");
    require(config->dims && config->n_dims > 0, ErrorKind::InvalidParameter, "at least one dimension is required");
    study.alphas.assign(config->alphas, config->alphas + config->n_alphas);
    study.dims.assign(config->dims, config->dims + config->n_dims);
    study.n_max = config->n_max;
    study.k_realizations = config->k_realizations;
    study.seed = to_seed(config->seed);
    study.threads = config->threads;
    const auto rows = mc_convergence_study(study);
    *out = dup_string(convergence_csv(rows, study.seed));
  });
}

scv_status scv_discrimination_csv(size_t m, double sigma, double sigma_x, const double* grid, size_t n_grid,
                                  const double* alphas, size_t n_alphas, size_t k_realizations, scv_seed seed,
                                  char** out) {
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const ToyModel truth{m, sigma, sigma_x};
    truth.validate();
    const std::vector<double> g = grid ? std::vector<double>(grid, grid + n_grid) : default_sigma_grid();
    require(!g.empty(), ErrorKind::InvalidParameter, "sigma_x' grid is empty");
    require(alphas && n_alphas > 0, ErrorKind::InvalidParameter, "at least one alpha is required");
    const SeedSpec s = to_seed(seed);
    // One measurement shared by every alpha.
    const Tensor y = draw_toy_measurement(truth, s.child(0));
    std::vector<DiscriminationRow> rows;
    for (size_t a = 0; a < n_alphas; ++a) {
      auto part = discrimination_curve_for(truth, y, g, alphas[a], k_realizations, s);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    *out = dup_string(discrimination_csv(rows, s));
  });
}

// ---- experiments

scv_status scv_select(const scv_model* const* candidates, size_t n_candidates, const scv_tensor* const* measurements,
                      size_t n_measurements, const scv_score_config* config, char** rankings_csv, size_t* best) {
  SCV_REQUIRE_NONNULL(candidates);
  SCV_REQUIRE_NONNULL(measurements);
  SCV_REQUIRE_NONNULL(config);
  return guarded([&] {
    std::vector<BayesianModel> models;
    for (size_t i = 0; i < n_candidates; ++i) {
      require(candidates[i] != nullptr, ErrorKind::InvalidParameter, "candidate is NULL");
      models.push_back(candidates[i]->m);
    }
    const auto ys = gather(measurements, n_measurements, "measurement");
    const ScoreParams params = params_from(*config);
    const auto result = few_shot_select(models, ys, metric_from(*config), params);
    if (rankings_csv) *rankings_csv = dup_string(splitcv::rankings_csv(result.ranking, params.seed));
    if (best) *best = result.ranking.front().index;
  });
}

scv_status scv_ood_calibrate(const double* reference, size_t n, double percentile, double* threshold) {
  SCV_REQUIRE_NONNULL(threshold);
  if (reference == nullptr && n > 0) return set_error(SCV_ERR_NULL_ARGUMENT, "reference must not be NULL");
  return guarded([&] { *threshold = calibrate_threshold({reference, n}, percentile).threshold; });
}

int scv_ood_reject(double threshold, double score) {
  OodTestSpec spec;
  spec.threshold = threshold;
  return ood_decide(spec, score) == OodDecision::Reject ? 1 : 0;
}

scv_status scv_ood_test(const scv_model* model, const scv_tensor* const* reference, size_t n_reference,
                        const scv_tensor* const* in_dist, size_t n_id, const scv_tensor* const* out_dist, size_t n_ood,
                        const scv_score_config* config, double percentile, scv_ood_result* out) {
  SCV_REQUIRE_NONNULL(model);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(out);
  return guarded([&] {
    const OodPopulations pops{gather(reference, n_reference, "reference"), gather(in_dist, n_id, "ID"),
                              gather(out_dist, n_ood, "OOD")};
    const ScoreParams params = params_from(*config);
    const auto run = run_ood_test(model->m, pops, metric_from(*config), percentile, params);
    std::string items = items_csv(run, params.seed);
    std::string rates = rates_csv(std::span<const OodRun>(&run, 1), params.seed);
    scv_ood_result r{};
    r.threshold = run.spec.threshold;
    r.type1 = run.rates.type1;
    r.power = run.rates.power;
    r.n_id = run.rates.n_id;
    r.n_ood = run.rates.n_ood;
    r.items_csv = dup_string(items);
    try {
      r.rates_csv = dup_string(rates);
    } catch (...) {
      std::free(r.items_csv);
      throw;
    }
    *out = r;
  });
}

void scv_ood_result_clear(scv_ood_result* result) {
  if (!result) return;
  std::free(result->items_csv);
  std::free(result->rates_csv);
  result->items_csv = nullptr;
  result->rates_csv = nullptr;
}

scv_status scv_alpha_sweep(const scv_model* model, const scv_tensor* const* reference, size_t n_reference,
                           const scv_tensor* const* in_dist, size_t n_id, const scv_tensor* const* out_dist,
                           size_t n_ood, const scv_score_config* config, double percentile, const double* alphas,
                           size_t n_alphas, char** rates_csv_out) {
  SCV_REQUIRE_NONNULL(model);
  SCV_REQUIRE_NONNULL(config);
  SCV_REQUIRE_NONNULL(rates_csv_out);
  if (alphas == nullptr && n_alphas > 0) return set_error(SCV_ERR_NULL_ARGUMENT, "alphas must not be NULL");
  return guarded([&] {
    const OodPopulations pops{gather(reference, n_reference, "reference"), gather(in_dist, n_id, "ID"),
                              gather(out_dist, n_ood, "OOD")};
    const ScoreParams params = params_from(*config);
    const auto runs = alpha_sweep(model->m, pops, {alphas, n_alphas}, metric_from(*config), percentile, params);
    *rates_csv_out = dup_string(rates_csv(runs, params.seed));
  });
}

scv_status scv_error_rates_from_csv(const char* items, double threshold, double* type1, double* power) {
  SCV_REQUIRE_NONNULL(items);
  return guarded([&] {
    OodTestSpec spec;
    spec.threshold = threshold;
    const auto labeled = parse_items_csv(items);
    const auto rates = error_rates(spec, labeled);
    if (type1) *type1 = rates.type1;
    if (power) *power = rates.power;
  });
}

}  // extern "C"
