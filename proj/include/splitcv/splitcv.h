/* C interface to the splitcv library.
 *
 * Every fallible call returns an scv_status. On failure the message of the
 * calling thread's last error is available from scv_last_error() until the
 * next failing call on that thread. Objects are opaque handles released with
 * the matching *_free function; strings returned through char** are released
 * with scv_string_free. Output handles are left untouched on failure.
 */
#ifndef SPLITCV_SPLITCV_H
#define SPLITCV_SPLITCV_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPLITCV_BUILDING_LIBRARY)
#define SCV_API __attribute__((visibility("default")))
#else
#define SCV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum scv_status {
  SCV_OK = 0,
  SCV_ERR_INVALID_ARGUMENT = 1,
  SCV_ERR_DIMENSION = 2,
  SCV_ERR_FORMAT = 3,
  SCV_ERR_IO = 4,
  SCV_ERR_UNSUPPORTED = 5,
  SCV_ERR_NUMERICAL = 6,
  SCV_ERR_DIVERGENCE = 7,
  SCV_ERR_CALIBRATION = 8,
  SCV_ERR_LOOKUP = 9,
  SCV_ERR_NULL_ARGUMENT = 10,
  SCV_ERR_INTERNAL = 11
} scv_status;

SCV_API const char* scv_version(void);
SCV_API const char* scv_status_name(scv_status status);
SCV_API const char* scv_last_error(void);
/* Byte offset of the last format error, or -1. */
SCV_API int64_t scv_last_error_offset(void);
SCV_API void scv_string_free(char* s);

/* A random stream: master seed plus an index path (may be empty). */
typedef struct scv_seed {
  uint64_t master_seed;
  const uint64_t* path;
  size_t path_len;
} scv_seed;

/* ---- tensors ---- */
typedef struct scv_tensor scv_tensor;

SCV_API scv_status scv_tensor_create(const size_t* shape, size_t ndim, const double* data, scv_tensor** out);
SCV_API void scv_tensor_free(scv_tensor* t);
SCV_API size_t scv_tensor_ndim(const scv_tensor* t);
SCV_API const size_t* scv_tensor_shape(const scv_tensor* t);
SCV_API size_t scv_tensor_size(const scv_tensor* t);
SCV_API const double* scv_tensor_data(const scv_tensor* t);
/* FT64, or binary/ASCII grayscale PGM scaled to [0,1]. */
SCV_API scv_status scv_tensor_read(const char* path, scv_tensor** out);
SCV_API scv_status scv_tensor_write(const scv_tensor* t, const char* path);
SCV_API scv_status scv_tensor_write_pgm(const scv_tensor* t, const char* path);
SCV_API scv_status scv_tensor_decode(const unsigned char* bytes, size_t len, scv_tensor** out);
/* Slice `index` along the first axis. */
SCV_API scv_status scv_tensor_unstack(const scv_tensor* stacked, size_t index, scv_tensor** out);

/* ---- fission ---- */
SCV_API scv_status scv_split(const scv_tensor* y, double sigma, double alpha, scv_seed seed, scv_tensor** y_plus,
                             scv_tensor** y_minus, scv_tensor** w);
SCV_API scv_status scv_recombine(const scv_tensor* y_plus, const scv_tensor* y_minus, double alpha,
                                 scv_tensor** y);

/* ---- operators ---- */
typedef struct scv_operator scv_operator;

SCV_API scv_status scv_operator_identity(const size_t* shape, size_t ndim, scv_operator** out);
/* family: gaussian, moffat, laplace, uniform. Kernel support is odd. */
SCV_API scv_status scv_operator_blur(const char* family, const double* params, size_t n_params, size_t support,
                                     const size_t* image_shape, size_t ndim, scv_operator** out);
SCV_API scv_status scv_operator_mri(const size_t* image_shape, size_t ndim, double acceleration,
                                    double center_fraction, scv_seed seed, scv_operator** out);
SCV_API void scv_operator_free(scv_operator* op);
SCV_API scv_status scv_operator_apply(const scv_operator* op, const scv_tensor* x, scv_tensor** out);
SCV_API scv_status scv_operator_adjoint(const scv_operator* op, const scv_tensor* y, scv_tensor** out);
SCV_API scv_status scv_operator_spectral_norm_sq(const scv_operator* op, double* out);

/* ---- models ---- */
typedef struct scv_model scv_model;

typedef struct scv_model_config {
  const char* prior; /* "gaussian" or "tv" */
  double sigma_x;
  double lambda;
  double epsilon;
  double sigma;        /* noise standard deviation */
  size_t valid_border; /* metric crop per side; 0 disables */
  const char* label;   /* may be NULL */
} scv_model_config;

SCV_API void scv_model_config_default(scv_model_config* config);
SCV_API scv_status scv_model_create(const scv_operator* op, const scv_model_config* config, scv_model** out);
/* One circulant model per kernel spec ("family:p1[,p2][@support]"), all
 * sharing the prior and a valid crop of half the largest support. The
 * border in `config` is ignored. `out` receives n_specs handles. */
SCV_API scv_status scv_kernel_models(const char* const* specs, size_t n_specs, const size_t* image_shape,
                                     size_t ndim, const scv_model_config* config, scv_model** out);
SCV_API void scv_model_free(scv_model* model);
SCV_API const char* scv_model_label(const scv_model* model);

/* ---- sampling ---- */
typedef struct scv_sampler_config {
  const char* kind; /* "exact" or "ula" */
  size_t burn_in;
  size_t thinning;
  double step_scale;
} scv_sampler_config;

SCV_API void scv_sampler_config_default(scv_sampler_config* config);
/* Stacked draws, shape [n, ...]. */
SCV_API scv_status scv_sample(const scv_model* model, const scv_tensor* y, size_t n,
                              const scv_sampler_config* config, scv_seed seed, scv_tensor** out);

/* ---- scoring ---- */
typedef struct scv_report scv_report;

/* Called in increasing k as realizations complete. */
typedef void (*scv_partial_fn)(void* user, size_t k, double partial);
/* Called for every posterior draw; may run concurrently from workers. The
 * tensor is only valid during the call. */
typedef void (*scv_sample_fn)(void* user, size_t index, const scv_tensor* sample);

typedef struct scv_score_config {
  const char* metric; /* "phi1", "phi2" or "phi3" */
  double alpha;
  size_t k_realizations;
  size_t n_samples;
  size_t l_samples;
  scv_sampler_config sampler;
  const char* embedding; /* "identity", "pyramid" or "external" */
  size_t embedding_levels;
  const char* embedding_path; /* FT64 stack for "external" */
  scv_seed seed;
  unsigned threads; /* 0: hardware parallelism */
  /* Realizations already computed by an earlier run. */
  const size_t* resume_k;
  const double* resume_partials;
  size_t resume_count;
  scv_partial_fn on_partial;
  scv_sample_fn on_sample;
  void* user;
} scv_score_config;

SCV_API void scv_score_config_default(scv_score_config* config);
SCV_API scv_status scv_score(const scv_model* model, const scv_tensor* y, const scv_score_config* config,
                             scv_report** out);
SCV_API void scv_report_free(scv_report* report);
SCV_API double scv_report_value(const scv_report* report);
SCV_API size_t scv_report_partials(const scv_report* report, const double** partials);
/* Score table row with header and provenance line. */
SCV_API scv_status scv_report_csv(const scv_report* report, char** out);
SCV_API scv_status scv_report_json(const scv_report* report, char** out);

/* ---- conjugate toy oracle: y = x + e, x ~ N(0, sigma_x^2 I_m), e ~ N(0, sigma^2 I_m) ---- */
SCV_API scv_status scv_oracle_log_predictive(size_t m, double sigma, double sigma_x, const double* y,
                                             const double* w, double alpha, double* out);
SCV_API scv_status scv_oracle_quadrature_predictive(double sigma, double sigma_x, double y, double w,
                                                    double alpha, double* out);
SCV_API scv_status scv_oracle_log_marginal(size_t m, double sigma, double sigma_x, const double* y, double* out);
/* Item i uses stream seed/{i}; `out` receives `count` handles. */
SCV_API scv_status scv_toy_population(size_t m, double sigma, double sigma_x, size_t count, scv_seed seed,
                                      scv_tensor** out);
SCV_API scv_status scv_toy_model(size_t m, double sigma, double sigma_x, scv_model** out);

typedef struct scv_convergence_config {
  double sigma;
  double sigma_x;
  const double* alphas;
  size_t n_alphas;
  const size_t* dims;
  size_t n_dims;
  size_t n_max;
  size_t k_realizations;
  scv_seed seed;
  unsigned threads;
} scv_convergence_config;

SCV_API scv_status scv_convergence_csv(const scv_convergence_config* config, char** out);
/* Log-ratio curve for each alpha over the sigma_x' grid (NULL grid: 0.5..2 by 0.05). */
SCV_API scv_status scv_discrimination_csv(size_t m, double sigma, double sigma_x, const double* grid, size_t n_grid,
                                          const double* alphas, size_t n_alphas, size_t k_realizations,
                                          scv_seed seed, char** out);

/* ---- experiments ---- */
/* Ranks candidates by the score averaged over the measurements; writes the
 * rankings CSV and the index of the best candidate. */
SCV_API scv_status scv_select(const scv_model* const* candidates, size_t n_candidates,
                              const scv_tensor* const* measurements, size_t n_measurements,
                              const scv_score_config* config, char** rankings_csv, size_t* best);

SCV_API scv_status scv_ood_calibrate(const double* reference, size_t n, double percentile, double* threshold);
/* 1 to reject (score > threshold), 0 to accept. */
SCV_API int scv_ood_reject(double threshold, double score);

typedef struct scv_ood_result {
  double threshold;
  double type1;
  double power;
  size_t n_id;
  size_t n_ood;
  char* items_csv;
  char* rates_csv;
} scv_ood_result;

/* Scores the populations with config->metric (phi1 or phi2), calibrates on
 * the reference and decides every ID and OOD item. Free the CSV strings
 * with scv_ood_result_clear. */
SCV_API scv_status scv_ood_test(const scv_model* model, const scv_tensor* const* reference, size_t n_reference,
                                const scv_tensor* const* in_dist, size_t n_id, const scv_tensor* const* out_dist,
                                size_t n_ood, const scv_score_config* config, double percentile,
                                scv_ood_result* out);
SCV_API void scv_ood_result_clear(scv_ood_result* result);
/* scv_ood_test at each alpha; writes the rates table (one row per alpha). */
SCV_API scv_status scv_alpha_sweep(const scv_model* model, const scv_tensor* const* reference, size_t n_reference,
                                   const scv_tensor* const* in_dist, size_t n_id, const scv_tensor* const* out_dist,
                                   size_t n_ood, const scv_score_config* config, double percentile,
                                   const double* alphas, size_t n_alphas, char** rates_csv);
/* Recomputes rates from a per-item CSV against a threshold. */
SCV_API scv_status scv_error_rates_from_csv(const char* items_csv, double threshold, double* type1, double* power);

#ifdef __cplusplus
}
#endif

#endif
