#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "splitcv/splitcv.h"

namespace {

scv_tensor* make(std::vector<size_t> shape, std::vector<double> data) {
  scv_tensor* t = nullptr;
  REQUIRE(scv_tensor_create(shape.data(), shape.size(), data.data(), &t) == SCV_OK);
  return t;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  scv_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(scv_status_name(SCV_OK)) == "ok");
  CHECK(std::string(scv_status_name(SCV_ERR_CALIBRATION)) == "calibration");
  CHECK(std::strlen(scv_version()) > 0);
}

TEST_CASE("null and invalid arguments report errors without crashing") {
  scv_tensor* t = nullptr;
  const size_t one = 1;
  const double v = 0;
  CHECK(scv_tensor_create(&one, 1, &v, nullptr) == SCV_ERR_NULL_ARGUMENT);
  CHECK(std::strlen(scv_last_error()) > 0);
  scv_tensor* y = make({3}, {1, 2, 3});
  scv_tensor *yp = nullptr, *ym = nullptr, *w = nullptr;
  CHECK(scv_split(y, 1.0, 1.5, scv_seed{1, nullptr, 0}, &yp, &ym, &w) == SCV_ERR_INVALID_ARGUMENT);
  CHECK(std::string(scv_last_error()).find("alpha") != std::string::npos);
  CHECK(yp == nullptr);
  scv_tensor_free(y);
  scv_tensor_free(nullptr);
}

TEST_CASE("decode errors carry a byte offset") {
  const unsigned char junk[8] = {'N', 'O', 'P', 'E', 0, 0, 0, 0};
  scv_tensor* t = nullptr;
  CHECK(scv_tensor_decode(junk, sizeof junk, &t) == SCV_ERR_FORMAT);
  CHECK(scv_last_error_offset() == 0);
  CHECK(scv_tensor_read("/nonexistent/file.ft64", &t) == SCV_ERR_IO);
}

TEST_CASE("split and recombine through the C API") {
  scv_tensor* y = make({2, 2}, {1, -2, 3, 0.5});
  const uint64_t path[1] = {4};
  scv_tensor *yp = nullptr, *ym = nullptr, *w = nullptr, *back = nullptr;
  REQUIRE(scv_split(y, 0.3, 0.25, scv_seed{9, path, 1}, &yp, &ym, &w) == SCV_OK);
  REQUIRE(scv_recombine(yp, ym, 0.25, &back) == SCV_OK);
  REQUIRE(scv_tensor_size(back) == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(std::abs(scv_tensor_data(back)[i] - scv_tensor_data(y)[i]) < 1e-12);
  const double c = std::sqrt(0.25 / 0.75);
  CHECK(scv_tensor_data(yp)[0] == doctest::Approx(1 + c * scv_tensor_data(w)[0]));
  for (auto* t : {y, yp, ym, w, back}) scv_tensor_free(t);
}

TEST_CASE("unstack") {
  scv_tensor* s = make({2, 3}, {1, 2, 3, 4, 5, 6});
  scv_tensor* row = nullptr;
  REQUIRE(scv_tensor_unstack(s, 1, &row) == SCV_OK);
  CHECK(scv_tensor_ndim(row) == 1);
  CHECK(scv_tensor_data(row)[0] == 4);
  CHECK(scv_tensor_unstack(s, 2, &row) == SCV_ERR_LOOKUP);
  scv_tensor_free(row);
  scv_tensor_free(s);
}

TEST_CASE("operators") {
  const size_t shape[2] = {8, 8};
  const double p[1] = {1.5};
  scv_operator* blur = nullptr;
  REQUIRE(scv_operator_blur("gaussian", p, 1, 5, shape, 2, &blur) == SCV_OK);
  double norm = 0;
  REQUIRE(scv_operator_spectral_norm_sq(blur, &norm) == SCV_OK);
  CHECK(norm == doctest::Approx(1.0));
  scv_operator* mri = nullptr;
  REQUIRE(scv_operator_mri(shape, 2, 4.0, 0.08, scv_seed{1, nullptr, 0}, &mri) == SCV_OK);
  scv_tensor* x = make({8, 8}, std::vector<double>(64, 1.0));
  scv_tensor* k = nullptr;
  REQUIRE(scv_operator_apply(mri, x, &k) == SCV_OK);
  CHECK(scv_tensor_ndim(k) == 3);
  CHECK(scv_tensor_shape(k)[0] == 2);
  scv_operator* bad = nullptr;
  CHECK(scv_operator_blur("box", p, 1, 5, shape, 2, &bad) == SCV_ERR_INVALID_ARGUMENT);
  scv_tensor_free(x);
  scv_tensor_free(k);
  scv_operator_free(blur);
  scv_operator_free(mri);
}

namespace {
struct Collected {
  std::vector<size_t> ks;
};
void on_partial(void* user, size_t k, double) { static_cast<Collected*>(user)->ks.push_back(k); }
}  // namespace

TEST_CASE("scoring, resume and reports") {
  scv_model* model = nullptr;
  REQUIRE(scv_toy_model(8, 0.5, 1.0, &model) == SCV_OK);
  scv_tensor* y = nullptr;
  REQUIRE(scv_toy_population(8, 0.5, 1.0, 1, scv_seed{3, nullptr, 0}, &y) == SCV_OK);

  scv_score_config cfg;
  scv_score_config_default(&cfg);
  cfg.metric = "phi2";
  cfg.k_realizations = 4;
  cfg.n_samples = 5;
  cfg.l_samples = 5;
  Collected got;
  cfg.on_partial = on_partial;
  cfg.user = &got;
  scv_report* full = nullptr;
  REQUIRE(scv_score(model, y, &cfg, &full) == SCV_OK);
  CHECK(got.ks == std::vector<size_t>{0, 1, 2, 3});
  const double* partials = nullptr;
  REQUIRE(scv_report_partials(full, &partials) == 4);

  const size_t ks[2] = {0, 1};
  const double vals[2] = {partials[0], partials[1]};
  cfg.resume_k = ks;
  cfg.resume_partials = vals;
  cfg.resume_count = 2;
  cfg.threads = 3;
  cfg.on_partial = nullptr;
  scv_report* resumed = nullptr;
  REQUIRE(scv_score(model, y, &cfg, &resumed) == SCV_OK);
  CHECK(scv_report_value(resumed) == scv_report_value(full));

  char* csv = nullptr;
  REQUIRE(scv_report_csv(full, &csv) == SCV_OK);
  CHECK(take(csv).rfind("model,metric,value,alpha,K,N,L,master_seed\n", 0) == 0);
  char* json = nullptr;
  REQUIRE(scv_report_json(full, &json) == SCV_OK);
  CHECK(take(json).find("\"phi2\"") != std::string::npos);

  cfg.metric = "phi7";
  scv_report* none = nullptr;
  CHECK(scv_score(model, y, &cfg, &none) == SCV_ERR_INVALID_ARGUMENT);
  CHECK(none == nullptr);

  scv_report_free(full);
  scv_report_free(resumed);
  scv_tensor_free(y);
  scv_model_free(model);
}

TEST_CASE("oracle entry points agree") {
  const double y = 0.4, w = -0.2;
  double closed = 0, quad = 0, marg = 0;
  REQUIRE(scv_oracle_log_predictive(1, 0.8, 1.1, &y, &w, 0.3, &closed) == SCV_OK);
  REQUIRE(scv_oracle_quadrature_predictive(0.8, 1.1, y, w, 0.3, &quad) == SCV_OK);
  CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(closed));
  REQUIRE(scv_oracle_log_marginal(1, 0.8, 1.1, &y, &marg) == SCV_OK);
  CHECK(std::isfinite(marg));
  const double alphas[1] = {0.5};
  char* csv = nullptr;
  REQUIRE(scv_discrimination_csv(16, 1.0, 1.0, nullptr, 0, alphas, 1, 5, scv_seed{1, nullptr, 0}, &csv) == SCV_OK);
  const std::string text = take(csv);
  CHECK(text.rfind("sigma_x_prime,alpha,mean_log_ratio,stderr\n", 0) == 0);
  size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 1 + 31 + 1);
}

TEST_CASE("selection and OOD through the C API") {
  scv_model *a = nullptr, *b = nullptr;
  REQUIRE(scv_toy_model(16, 0.5, 1.0, &a) == SCV_OK);
  REQUIRE(scv_toy_model(16, 0.5, 6.0, &b) == SCV_OK);
  std::vector<scv_tensor*> items(60), odd(20);
  REQUIRE(scv_toy_population(16, 0.5, 1.0, 60, scv_seed{5, nullptr, 0}, items.data()) == SCV_OK);
  REQUIRE(scv_toy_population(16, 0.5, 4.0, 20, scv_seed{6, nullptr, 0}, odd.data()) == SCV_OK);

  scv_score_config cfg;
  scv_score_config_default(&cfg);
  cfg.metric = "phi2";
  cfg.alpha = 0.1;
  cfg.k_realizations = 3;
  cfg.n_samples = 5;
  cfg.l_samples = 5;
  const scv_model* cands[2] = {b, a};
  char* rankings = nullptr;
  size_t best = 99;
  REQUIRE(scv_select(cands, 2, items.data(), 3, &cfg, &rankings, &best) == SCV_OK);
  CHECK(best == 1);
  CHECK(take(rankings).rfind("candidate,score,rank,tie\n", 0) == 0);

  cfg.metric = "phi1";
  scv_ood_result res{};
  REQUIRE(scv_ood_test(a, items.data(), 40, items.data() + 40, 20, odd.data(), 20, &cfg, 90, &res) == SCV_OK);
  CHECK(res.n_id == 20);
  CHECK(res.n_ood == 20);
  double t1 = -1, pw = -1;
  REQUIRE(scv_error_rates_from_csv(res.items_csv, res.threshold, &t1, &pw) == SCV_OK);
  CHECK(t1 == res.type1);
  CHECK(pw == res.power);
  CHECK(scv_ood_reject(res.threshold, res.threshold) == 0);
  scv_ood_result_clear(&res);
  CHECK(res.items_csv == nullptr);

  double thr = 0;
  const double ref[10] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  CHECK(scv_ood_calibrate(ref, 10, 95, &thr) == SCV_ERR_CALIBRATION);

  for (auto* t : items) scv_tensor_free(t);
  for (auto* t : odd) scv_tensor_free(t);
  scv_model_free(a);
  scv_model_free(b);
}
