#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/gaussian_oracle.hpp"
#include "core/linops.hpp"
#include "core/models.hpp"
#include "core/scoring.hpp"

namespace splitcv {

// ---- model selection --------------------------------------------------------

struct RankedCandidate {
  std::size_t index = 0;  // position in the candidate list
  std::string label;
  double score = 0.0;
  std::size_t rank = 0;  // 1 = best
  bool tie = false;      // another candidate has exactly the same score
};

// Ascending for phi1/phi2, descending for phi3. Equal scores keep list order.
std::vector<RankedCandidate> rank_scores(std::span<const double> scores, std::span<const std::string> labels,
                                         Metric metric);

struct SelectionResult {
  // reports[j][c]: measurement j, candidate c
  std::vector<std::vector<ScoreReport>> reports;
  std::vector<double> scores;  // per candidate, averaged over measurements
  std::vector<RankedCandidate> ranking;
};

// Every candidate is scored with the same params.seed, hence the same w_k
// and chain streams.
SelectionResult select_model(std::span<const BayesianModel> candidates, const Tensor& y, Metric metric,
                             const ScoreParams& params);
SelectionResult few_shot_select(std::span<const BayesianModel> candidates, std::span<const Tensor> measurements,
                                Metric metric, const ScoreParams& params);

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  std::vector<double> params;
  std::size_t support = kDefaultKernelSupport;
};

KernelSpec parse_kernel_spec(const std::string& text);  // "gaussian:2", "moffat:0.5,1", "uniform:3@25"

// Circulant models sharing `prior` and `sigma`, with the valid crop set to
// half the largest candidate support.
std::vector<BayesianModel> kernel_candidates(std::span<const KernelSpec> kernels, const Shape& image_shape,
                                             const Prior& prior, double sigma);

// Sum of `blobs` Gaussian bumps with centers uniform on the grid, widths
// uniform in [2, 8] and amplitudes uniform in [-1, 1].
Tensor synthetic_smooth_image(const Shape& shape, const SeedSpec& seed, std::size_t blobs = 12);

// A x + N(0, sigma^2)
Tensor simulate_measurement(const LinearOperator& op, const Tensor& x, double sigma, const SeedSpec& seed);

struct KernelSelectionSetup {
  Shape image_shape{64, 64};
  std::vector<KernelSpec> candidates;
  std::size_t truth = 0;
  double sigma = 0.1;
  double sigma_x = 0.2;
  std::size_t shots = 3;
  ScoreParams params;  // params.seed is replaced per trial
};

struct KernelSelectionTrial {
  std::size_t single_shot_choice = 0;
  std::size_t few_shot_choice = 0;
  std::vector<double> single_shot_scores;
  std::vector<double> few_shot_scores;
};

// One seeded trial of phi1 kernel selection on synthetic images blurred by
// the truth kernel. The single-shot measurement is the first few-shot one.
KernelSelectionTrial kernel_selection_trial(const KernelSelectionSetup& setup, const SeedSpec& seed);

// ---- OOD testing ------------------------------------------------------------

struct OodTestSpec {
  Metric statistic = Metric::Phi1;
  std::vector<double> reference_scores;
  double percentile = 95.0;
  double threshold = 0.0;
};

// Nearest-rank percentile: the ceil(p n / 100)-th smallest reference score.
// At least one reference must lie above that rank.
OodTestSpec calibrate_threshold(std::span<const double> reference_scores, double percentile = 95.0,
                                Metric statistic = Metric::Phi1);

enum class OodDecision { Accept, Reject };
const char* to_string(OodDecision decision);

// Reject iff score > threshold.
OodDecision ood_decide(const OodTestSpec& spec, double score);

struct LabeledScore {
  std::string item_id;
  double score = 0.0;
  bool is_ood = false;
};

struct ErrorRates {
  double type1 = 0.0;
  double power = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::size_t rejected_id = 0;
  std::size_t rejected_ood = 0;
};

ErrorRates error_rates(const OodTestSpec& spec, std::span<const LabeledScore> items);

// Item i is draw_toy_measurement(generator, seed/{i}).
std::vector<Tensor> toy_population(const ToyModel& generator, std::size_t count, const SeedSpec& seed);

// Scores each item under `model`; item i uses scoring seed params.seed/{i}.
// Items run in parallel over params.threads.
std::vector<double> score_population(const BayesianModel& model, std::span<const Tensor> items, Metric metric,
                                     const ScoreParams& params);

struct OodPopulations {
  std::vector<Tensor> reference;
  std::vector<Tensor> in_distribution;
  std::vector<Tensor> out_of_distribution;
};

struct OodRun {
  double alpha = 0.0;
  OodTestSpec spec;
  std::vector<LabeledScore> items;  // ID items first, then OOD
  ErrorRates rates;
};

// Scores the three populations (scoring seeds params.seed/{0}, /{1}, /{2}),
// calibrates on the reference and decides every test item.
OodRun run_ood_test(const BayesianModel& model, const OodPopulations& populations, Metric metric,
                    double percentile, const ScoreParams& params);

// run_ood_test for each alpha.
std::vector<OodRun> alpha_sweep(const BayesianModel& model, const OodPopulations& populations,
                                std::span<const double> alphas, Metric metric, double percentile,
                                const ScoreParams& params);

}  // namespace splitcv
