#include "core/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace splitcv {

std::vector<RankedCandidate> rank_scores(std::span<const double> scores, std::span<const std::string> labels,
                                         Metric metric) {
  require(scores.size() == labels.size(), ErrorKind::Dimension, "one label per score expected");
  for (double s : scores) require(!std::isnan(s), ErrorKind::Numerical, "cannot rank a NaN score");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const bool descending = metric == Metric::Phi3;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  std::vector<RankedCandidate> out;
  out.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    RankedCandidate c;
    c.index = i;
    c.label = labels[i];
    c.score = scores[i];
    c.rank = pos + 1;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (j != i && scores[j] == scores[i]) c.tie = true;
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

void check_candidates(std::span<const BayesianModel> candidates) {
  require(candidates.size() >= 2, ErrorKind::InvalidParameter, "model selection needs at least two candidates");
  const auto& first = candidates.front().op();
  for (const auto& c : candidates) {
    require(c.op().input_shape() == first.input_shape() && c.op().output_shape() == first.output_shape(),
            ErrorKind::Dimension, "candidate '" + c.label + "' has different dimensions from '" +
                                      candidates.front().label + "'");
  }
}

}  // namespace

SelectionResult few_shot_select(std::span<const BayesianModel> candidates, std::span<const Tensor> measurements,
                                Metric metric, const ScoreParams& params) {
  check_candidates(candidates);
  require(!measurements.empty(), ErrorKind::InvalidParameter, "at least one measurement is required");
  for (const auto& y : measurements)
    require(y.shape() == candidates.front().op().output_shape(), ErrorKind::Dimension,
            "measurement " + shape_to_string(y.shape()) + " does not match the candidates' output " +
                shape_to_string(candidates.front().op().output_shape()));

  const std::size_t nc = candidates.size(), nm = measurements.size();
  SelectionResult result;
  result.reports.assign(nm, std::vector<ScoreReport>(nc));
  ScoreParams inner = params;
  inner.threads = 1;
  parallel_for(nc * nm, params.threads, [&](std::size_t job) {
    const std::size_t j = job / nc, c = job % nc;
    result.reports[j][c] = score(metric, candidates[c], measurements[j], inner);
  });

  std::vector<std::string> labels;
  result.scores.assign(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t j = 0; j < nm; ++j) result.scores[c] += result.reports[j][c].value();
    result.scores[c] /= static_cast<double>(nm);
    labels.push_back(candidates[c].label.empty() ? "candidate" + std::to_string(c) : candidates[c].label);
  }
  result.ranking = rank_scores(result.scores, labels, metric);
  return result;
}

SelectionResult select_model(std::span<const BayesianModel> candidates, const Tensor& y, Metric metric,
                             const ScoreParams& params) {
  return few_shot_select(candidates, std::span<const Tensor>(&y, 1), metric, params);
}

KernelSpec parse_kernel_spec(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorKind::InvalidParameter,
          "kernel '" + text + "' must look like family:p1[,p2][@support]");
  KernelSpec spec;
  spec.family = parse_kernel_family(text.substr(0, colon));
  std::string rest = text.substr(colon + 1);
  if (const auto at = rest.find('@'); at != std::string::npos) {
    try {
      std::size_t used = 0;
      const long support = std::stol(rest.substr(at + 1), &used);
      require(used == rest.size() - at - 1 && support > 0, ErrorKind::InvalidParameter, "bad support");
      spec.support = static_cast<std::size_t>(support);
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidParameter, "bad kernel support in '" + text + "'");
    }
    rest.resize(at);
  }
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = std::min(rest.find(',', pos), rest.size());
    try {
      std::size_t used = 0;
      const std::string token = rest.substr(pos, comma - pos);
      spec.params.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidParameter, "bad kernel parameter in '" + text + "'");
    }
    pos = comma + 1;
  }
  return spec;
}

std::vector<BayesianModel> kernel_candidates(std::span<const KernelSpec> kernels, const Shape& image_shape,
                                             const Prior& prior, double sigma) {
  std::vector<BlurKernel> built;
  for (const auto& k : kernels) built.push_back(make_kernel(k.family, k.params, k.support));
  const auto valid = ValidMask::for_kernels(built);
  std::vector<BayesianModel> out;
  for (const auto& k : built) {
    auto op = std::make_shared<const LinearOperator>(LinearOperator::circulant(k.values, image_shape));
    out.push_back(make_model(prior, std::move(op), sigma, valid, k.label()));
  }
  return out;
}

Tensor synthetic_smooth_image(const Shape& shape, const SeedSpec& seed, std::size_t blobs) {
  require(shape.size() == 2, ErrorKind::Dimension, "synthetic images are 2-D");
  const std::size_t h = shape[0], w = shape[1];
  RandomStream rng(seed);
  std::vector<double> img(h * w, 0.0);
  for (std::size_t b = 0; b < blobs; ++b) {
    const double cy = rng.uniform() * static_cast<double>(h);
    const double cx = rng.uniform() * static_cast<double>(w);
    const double s = 2.0 + 6.0 * rng.uniform();
    const double a = -1.0 + 2.0 * rng.uniform();
    const double inv = 1.0 / (2.0 * s * s);
    for (std::size_t i = 0; i < h; ++i) {
      const double dy = static_cast<double>(i) - cy;
      for (std::size_t j = 0; j < w; ++j) {
        const double dx = static_cast<double>(j) - cx;
        img[i * w + j] += a * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return Tensor(shape, std::move(img));
}

Tensor simulate_measurement(const LinearOperator& op, const Tensor& x, double sigma, const SeedSpec& seed) {
  return op.apply(x) + gaussian_noise(op.output_shape(), sigma, seed);
}

KernelSelectionTrial kernel_selection_trial(const KernelSelectionSetup& setup, const SeedSpec& seed) {
  require(setup.truth < setup.candidates.size(), ErrorKind::InvalidParameter, "truth index out of range");
  require(setup.shots >= 1, ErrorKind::InvalidParameter, "at least one shot is required");
  const auto models = kernel_candidates(setup.candidates, setup.image_shape, IidGaussianPrior{setup.sigma_x},
                                        setup.sigma);
  std::vector<Tensor> ys;
  for (std::size_t j = 0; j < setup.shots; ++j) {
    const Tensor x = synthetic_smooth_image(setup.image_shape, seed.child({0, j}));
    ys.push_back(simulate_measurement(models[setup.truth].op(), x, setup.sigma, seed.child({1, j})));
  }
  ScoreParams params = setup.params;
  params.seed = seed.child(2);
  const auto few = few_shot_select(models, ys, Metric::Phi1, params);
  // The single-shot scores are the first measurement's column of the few-shot table.
  KernelSelectionTrial trial;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < models.size(); ++c) {
    trial.single_shot_scores.push_back(few.reports[0][c].value());
    labels.push_back(models[c].label);
  }
  trial.few_shot_scores = few.scores;
  trial.single_shot_choice = rank_scores(trial.single_shot_scores, labels, Metric::Phi1).front().index;
  trial.few_shot_choice = few.ranking.front().index;
  return trial;
}

// ---- OOD ------------------------------------------------------------------

OodTestSpec calibrate_threshold(std::span<const double> reference_scores, double percentile, Metric statistic) {
  require(percentile > 0.0 && percentile < 100.0, ErrorKind::InvalidParameter, "percentile must lie in (0, 100)");
  const std::size_t n = reference_scores.size();
  const double exact_rank = percentile * static_cast<double>(n) / 100.0;
  const auto rank = static_cast<std::size_t>(std::ceil(exact_rank - 1e-9));
  if (n == 0 || rank >= n) {
    const auto needed = static_cast<std::size_t>(std::ceil(100.0 / (100.0 - percentile) - 1e-9));
    fail(ErrorKind::Calibration, "percentile " + std::to_string(percentile) + " needs at least " +
                                     std::to_string(needed) + " reference scores, got " + std::to_string(n));
  }
  for (double s : reference_scores) require(!std::isnan(s), ErrorKind::Numerical, "reference score is NaN");
  OodTestSpec spec;
  spec.statistic = statistic;
  spec.reference_scores.assign(reference_scores.begin(), reference_scores.end());
  spec.percentile = percentile;
  std::vector<double> sorted = spec.reference_scores;
  std::sort(sorted.begin(), sorted.end());
  spec.threshold = sorted[std::max<std::size_t>(rank, 1) - 1];
  return spec;
}

const char* to_string(OodDecision decision) { return decision == OodDecision::Reject ? "reject" : "accept"; }

OodDecision ood_decide(const OodTestSpec& spec, double score) {
  return score > spec.threshold ? OodDecision::Reject : OodDecision::Accept;
}

ErrorRates error_rates(const OodTestSpec& spec, std::span<const LabeledScore> items) {
  ErrorRates r;
  for (const auto& item : items) {
    const bool rejected = ood_decide(spec, item.score) == OodDecision::Reject;
    if (item.is_ood) {
      ++r.n_ood;
      r.rejected_ood += rejected;
    } else {
      ++r.n_id;
      r.rejected_id += rejected;
    }
  }
  require(r.n_id > 0, ErrorKind::InvalidParameter, "type I error is undefined without in-distribution items");
  require(r.n_ood > 0, ErrorKind::InvalidParameter, "power is undefined without out-of-distribution items");
  r.type1 = static_cast<double>(r.rejected_id) / static_cast<double>(r.n_id);
  r.power = static_cast<double>(r.rejected_ood) / static_cast<double>(r.n_ood);
  return r;
}

std::vector<Tensor> toy_population(const ToyModel& generator, std::size_t count, const SeedSpec& seed) {
  std::vector<Tensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_toy_measurement(generator, seed.child(i)));
  return out;
}

std::vector<double> score_population(const BayesianModel& model, std::span<const Tensor> items, Metric metric,
                                     const ScoreParams& params) {
  std::vector<double> out(items.size());
  parallel_for(items.size(), params.threads, [&](std::size_t i) {
    ScoreParams item = params;
    item.seed = params.seed.child(i);
    item.threads = 1;
    out[i] = score(metric, model, items[i], item).value();
  });
  return out;
}

OodRun run_ood_test(const BayesianModel& model, const OodPopulations& populations, Metric metric,
                    double percentile, const ScoreParams& params) {
  require(metric != Metric::Phi3, ErrorKind::InvalidParameter, "the OOD test statistic must be phi1 or phi2");
  auto with_seed = [&](std::uint64_t i) {
    ScoreParams p = params;
    p.seed = params.seed.child(i);
    return p;
  };
  const auto reference = score_population(model, populations.reference, metric, with_seed(0));
  const auto id = score_population(model, populations.in_distribution, metric, with_seed(1));
  const auto ood = score_population(model, populations.out_of_distribution, metric, with_seed(2));

  OodRun run;
  run.alpha = params.alpha;
  run.spec = calibrate_threshold(reference, percentile, metric);
  for (std::size_t i = 0; i < id.size(); ++i) run.items.push_back({"id" + std::to_string(i), id[i], false});
  for (std::size_t i = 0; i < ood.size(); ++i) run.items.push_back({"ood" + std::to_string(i), ood[i], true});
  run.rates = error_rates(run.spec, run.items);
  return run;
}

std::vector<OodRun> alpha_sweep(const BayesianModel& model, const OodPopulations& populations,
                                std::span<const double> alphas, Metric metric, double percentile,
                                const ScoreParams& params) {
  require(!alphas.empty(), ErrorKind::InvalidParameter, "alpha sweep needs at least one alpha");
  std::vector<OodRun> out;
  for (double alpha : alphas) {
    ScoreParams p = params;
    p.alpha = alpha;
    out.push_back(run_ood_test(model, populations, metric, percentile, p));
  }
  return out;
}

}  // namespace splitcv
