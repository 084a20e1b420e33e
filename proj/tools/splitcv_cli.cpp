// splitcv command-line front end. Talks to the library through the C API only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <mutex>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitcv/splitcv.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kIo = 1, kValidation = 2, kNumerical = 3 };

// Carries an exit code and a kind name up to main.
struct CliError {
  int code;
  std::string kind;
  std::string message;
};

[[noreturn]] void invalid(const std::string& message) { throw CliError{kValidation, "invalid_argument", message}; }

int exit_code_for(scv_status s) {
  switch (s) {
    case SCV_OK: return kOk;
    case SCV_ERR_IO:
    case SCV_ERR_FORMAT: return kIo;
    case SCV_ERR_NUMERICAL:
    case SCV_ERR_DIVERGENCE: return kNumerical;
    default: return kValidation;
  }
}

void check(scv_status s) {
  if (s != SCV_OK) throw CliError{exit_code_for(s), scv_status_name(s), scv_last_error()};
}

struct TensorDeleter {
  void operator()(scv_tensor* t) const { scv_tensor_free(t); }
};
struct OperatorDeleter {
  void operator()(scv_operator* o) const { scv_operator_free(o); }
};
struct ModelDeleter {
  void operator()(scv_model* m) const { scv_model_free(m); }
};
struct ReportDeleter {
  void operator()(scv_report* r) const { scv_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { scv_string_free(s); }
};
using TensorPtr = std::unique_ptr<scv_tensor, TensorDeleter>;
using OperatorPtr = std::unique_ptr<scv_operator, OperatorDeleter>;
using ModelPtr = std::unique_ptr<scv_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<scv_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

TensorPtr read_tensor(const std::string& path) {
  scv_tensor* t = nullptr;
  check(scv_tensor_read(path.c_str(), &t));
  return TensorPtr(t);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{kIo, "io", "cannot open '" + path + "' for writing"};
  out << text;
  if (!out.flush()) throw CliError{kIo, "io", "failed writing '" + path + "'"};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kIo, "io", "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string take(StringPtr s) { return s ? std::string(s.get()) : std::string(); }

// ---- configuration --------------------------------------------------------

const std::vector<std::string> kConfigKeys = {
    "sigma",        "sigma_x",    "alpha",          "k_realizations", "n_samples",           "l_samples",
    "metric",       "sampler",    "burn_in",        "thinning",       "step_scale",          "prior",
    "lambda",       "epsilon",    "kernel_family",  "kernel_params",  "kernel_support",      "mask_r",
    "mask_center_fraction",       "embedding",      "embedding_levels", "percentile",        "master_seed",
    "threads"};

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (auto& c : out)
    if (c == '_') c = '-';
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Config {
 public:
  void load_file(const std::string& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = path + ":" + std::to_string(line_no);
      if (eq == std::string::npos) invalid(where + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
        invalid(where + ": unknown config key '" + key + "'");
      if (!seen.insert(key).second) invalid(where + ": duplicate config key '" + key + "'");
      values_[key] = {trim(line.substr(eq + 1)), key + " (" + where + ")"};
    }
  }

  void set_flag(const std::string& key, const std::string& value) { values_[key] = {value, flag_name(key)}; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.text;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) const {
    const std::string v = str(key, fallback);
    if (!allowed.count(v)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      invalid(source(key) + " must be one of {" + list + "}, got '" + v + "'");
    }
    return v;
  }

  // Checks lo < v < hi (or <= when inclusive).
  double real(const std::string& key, double fallback, double lo, double hi, bool lo_inclusive = false,
              bool hi_inclusive = false) const {
    if (!has(key)) return fallback;
    const double v = parse_real(key, str(key, ""));
    const bool ok_lo = lo_inclusive ? v >= lo : v > lo;
    const bool ok_hi = hi_inclusive ? v <= hi : v < hi;
    if (!ok_lo || !ok_hi) {
      std::ostringstream os;
      os << source(key) << " must lie in " << (lo_inclusive ? '[' : '(') << lo << ", " << hi
         << (hi_inclusive ? ']' : ')') << ", got " << str(key, "");
      invalid(os.str());
    }
    return v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t min_value) const {
    if (!has(key)) return fallback;
    const std::string text = str(key, "");
    std::uint64_t v = 0;
    std::size_t used = 0;
    try {
      if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
      v = std::stoull(text, &used);
    } catch (const std::logic_error&) {
      invalid(source(key) + " must be a non-negative integer, got '" + text + "'");
    }
    if (used != text.size()) invalid(source(key) + " must be a non-negative integer, got '" + text + "'");
    if (v < min_value) invalid(source(key) + " must be >= " + std::to_string(min_value) + ", got " + text);
    return v;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::string text = str(key, "");
    std::replace(text.begin(), text.end(), ';', ',');
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) out.push_back(parse_real(key, trim(token)));
    return out;
  }

  std::string source(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? flag_name(key) : it->second.origin;
  }

 private:
  struct Value {
    std::string text;
    std::string origin;
  };

  double parse_real(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::logic_error&) {
    }
    invalid(source(key) + " must be a finite number, got '" + text + "'");
  }

  std::map<std::string, Value> values_;
};

struct Settings {
  double sigma, sigma_x, alpha;
  std::size_t k, n, l;
  std::string metric;
  scv_sampler_config sampler;
  std::string prior;
  double lambda, epsilon;
  std::string kernel_family;
  std::vector<double> kernel_params;
  std::size_t kernel_support;
  std::optional<double> mask_r;
  double mask_center_fraction;
  std::string embedding;
  std::string embedding_path;
  std::size_t embedding_levels;
  double percentile;
  std::uint64_t master_seed;
  unsigned threads;
};

// Subcommand-specific defaults are passed in; everything is validated here.
Settings resolve(const Config& c, double sigma_default = 1.0, double sigma_x_default = 1.0,
                 double alpha_default = 0.5, std::size_t k_default = 10, std::size_t n_default = 100,
                 std::size_t l_default = 20) {
  Settings s{};
  const double inf = INFINITY;
  s.sigma = c.real("sigma", sigma_default, 0, inf);
  s.sigma_x = c.real("sigma_x", sigma_x_default, 0, inf);
  s.alpha = c.real("alpha", alpha_default, 0, 1);
  s.k = c.integer("k_realizations", k_default, 1);
  s.n = c.integer("n_samples", n_default, 1);
  s.l = c.integer("l_samples", l_default, 1);
  s.metric = c.choice("metric", "phi1", {"phi1", "phi2", "phi3"});
  s.sampler.kind = c.choice("sampler", "exact", {"exact", "ula"}) == "exact" ? "exact" : "ula";
  s.sampler.burn_in = c.integer("burn_in", 200, 0);
  s.sampler.thinning = c.integer("thinning", 20, 1);
  s.sampler.step_scale = c.real("step_scale", 0.9, 0, 1, false, true);
  s.prior = c.choice("prior", "gaussian", {"gaussian", "tv"});
  s.lambda = c.real("lambda", 10.0, 0, inf);
  s.epsilon = c.real("epsilon", 0.01, 0, inf);
  s.kernel_family = c.choice("kernel_family", "identity", {"identity", "gaussian", "moffat", "laplace", "uniform"});
  if (c.has("kernel_params")) s.kernel_params = c.reals("kernel_params");
  s.kernel_support = c.integer("kernel_support", 25, 1);
  if (s.kernel_support % 2 == 0) invalid(c.source("kernel_support") + " must be odd");
  if (c.has("mask_r")) s.mask_r = c.real("mask_r", 4.0, 1, inf, true);
  s.mask_center_fraction = c.real("mask_center_fraction", 0.08, 0, 1, false, true);
  const std::string emb = c.str("embedding", "identity");
  if (emb.rfind("external:", 0) == 0) {
    s.embedding = "external";
    s.embedding_path = emb.substr(9);
  } else {
    s.embedding = c.choice("embedding", "identity", {"identity", "pyramid", "external:<file>"});
  }
  s.embedding_levels = c.integer("embedding_levels", s.embedding == "pyramid" ? 3 : 1, 1);
  s.percentile = c.real("percentile", 95.0, 0, 100);
  s.master_seed = c.integer("master_seed", 0, 0);
  s.threads = static_cast<unsigned>(c.integer("threads", 0, 0));
  if (s.kernel_family != "identity" && s.mask_r) invalid("kernel_family and mask_r cannot both be set");
  return s;
}

// Stable storage for the strings a scv_score_config points at.
struct ScoreConfigHolder {
  scv_score_config config;
  std::string metric, embedding, embedding_path, sampler;
  std::vector<std::uint64_t> path;
};

void fill_score_config(const Settings& s, ScoreConfigHolder& h) {
  scv_score_config_default(&h.config);
  h.metric = s.metric;
  h.embedding = s.embedding;
  h.embedding_path = s.embedding_path;
  h.sampler = s.sampler.kind;
  h.config.metric = h.metric.c_str();
  h.config.alpha = s.alpha;
  h.config.k_realizations = s.k;
  h.config.n_samples = s.n;
  h.config.l_samples = s.l;
  h.config.sampler = s.sampler;
  h.config.sampler.kind = h.sampler.c_str();
  h.config.embedding = h.embedding.c_str();
  h.config.embedding_levels = s.embedding_levels;
  h.config.embedding_path = h.embedding_path.empty() ? nullptr : h.embedding_path.c_str();
  h.config.seed = scv_seed{s.master_seed, nullptr, 0};
  h.config.threads = s.threads;
}

scv_model_config model_config(const Settings& s) {
  scv_model_config mc;
  scv_model_config_default(&mc);
  mc.prior = s.prior == "tv" ? "tv" : "gaussian";
  mc.sigma_x = s.sigma_x;
  mc.lambda = s.lambda;
  mc.epsilon = s.epsilon;
  mc.sigma = s.sigma;
  return mc;
}

std::string kernel_spec_string(const Settings& s) {
  std::ostringstream os;
  os.precision(17);
  os << s.kernel_family << ':';
  for (std::size_t i = 0; i < s.kernel_params.size(); ++i) os << (i ? "," : "") << s.kernel_params[i];
  os << '@' << s.kernel_support;
  return os.str();
}

// identity, circulant blur (kernel_family) or masked Fourier (mask_r).
ModelPtr build_model(const Settings& s, const scv_tensor* y) {
  const std::size_t ndim = scv_tensor_ndim(y);
  const std::vector<std::size_t> out_shape(scv_tensor_shape(y), scv_tensor_shape(y) + ndim);
  scv_model_config mc = model_config(s);
  scv_model* model = nullptr;
  if (s.mask_r) {
    if (ndim != 3 || out_shape[0] != 2) invalid("masked Fourier measurements must have shape [2,H,W]");
    const std::vector<std::size_t> image{out_shape[1], out_shape[2]};
    const std::uint64_t mask_path[] = {9};
    scv_operator* op = nullptr;
    check(scv_operator_mri(image.data(), 2, *s.mask_r, s.mask_center_fraction, scv_seed{s.master_seed, mask_path, 1},
                           &op));
    OperatorPtr owned(op);
    mc.label = "mri";
    check(scv_model_create(op, &mc, &model));
  } else if (s.kernel_family != "identity") {
    const std::string spec = kernel_spec_string(s);
    const char* specs[] = {spec.c_str()};
    check(scv_kernel_models(specs, 1, out_shape.data(), ndim, &mc, &model));
  } else {
    scv_operator* op = nullptr;
    check(scv_operator_identity(out_shape.data(), ndim, &op));
    OperatorPtr owned(op);
    mc.label = "identity";
    check(scv_model_create(op, &mc, &model));
  }
  return ModelPtr(model);
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".ft64" || ext == ".pgm")) files.push_back(e.path().string());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

std::vector<TensorPtr> read_all(const std::vector<std::string>& paths) {
  std::vector<TensorPtr> out;
  for (const auto& p : expand_inputs(paths)) out.push_back(read_tensor(p));
  return out;
}

std::vector<const scv_tensor*> raw(const std::vector<TensorPtr>& v) {
  std::vector<const scv_tensor*> out;
  for (const auto& t : v) out.push_back(t.get());
  return out;
}

// ---- subcommands ------------------------------------------------------------

struct SplitArgs {
  std::string input;
  std::string out_dir = ".";
};

void cmd_split(const Config& c, const SplitArgs& a) {
  const Settings s = resolve(c);
  const auto y = read_tensor(a.input);
  scv_tensor *yp = nullptr, *ym = nullptr, *w = nullptr;
  check(scv_split(y.get(), s.sigma, s.alpha, scv_seed{s.master_seed, nullptr, 0}, &yp, &ym, &w));
  TensorPtr p(yp), m(ym), ww(w);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw CliError{kIo, "io", "cannot create '" + a.out_dir + "': " + ec.message()};
  check(scv_tensor_write(p.get(), (fs::path(a.out_dir) / "y_plus.ft64").c_str()));
  check(scv_tensor_write(m.get(), (fs::path(a.out_dir) / "y_minus.ft64").c_str()));
  check(scv_tensor_write(ww.get(), (fs::path(a.out_dir) / "w.ft64").c_str()));
}

struct OracleArgs {
  std::vector<std::size_t> dims{10};
  std::vector<double> alphas;
  std::size_t n_max = 50000;
  std::size_t k = 25;
  std::string output;
};

void cmd_oracle_check(const Config& c, const OracleArgs& a) {
  const Settings s = resolve(c, 0.05, 1.0, 0.5, a.k);
  std::vector<double> alphas = a.alphas.empty() ? std::vector<double>{s.alpha} : a.alphas;
  for (double al : alphas)
    if (!(al > 0 && al < 1)) invalid("--alphas entries must lie in (0, 1)");
  if (a.n_max < 100) invalid("--n-max must be >= 100");
  if (a.k < 1) invalid("--k must be >= 1");
  for (auto m : a.dims)
    if (m < 1) invalid("--m entries must be >= 1");
  const std::size_t k = c.has("k_realizations") ? s.k : a.k;
  scv_convergence_config cc{s.sigma, s.sigma_x, alphas.data(), alphas.size(), a.dims.data(), a.dims.size(),
                            a.n_max,  k,         scv_seed{s.master_seed, nullptr, 0}, s.threads};
  char* csv = nullptr;
  check(scv_convergence_csv(&cc, &csv));
  write_text(a.output, take(StringPtr(csv)));
}

struct DiscriminateArgs {
  std::size_t m = 1000;
  std::size_t k = 250;
  std::vector<double> alphas{0.1, 0.5, 0.9};
  std::vector<double> grid;
  std::string output;
};

void cmd_discriminate(const Config& c, const DiscriminateArgs& a) {
  const Settings s = resolve(c);
  if (a.m < 1) invalid("--m must be >= 1");
  const std::size_t k = c.has("k_realizations") ? s.k : a.k;
  if (k < 1) invalid("--k must be >= 1");
  for (double al : a.alphas)
    if (!(al > 0 && al < 1)) invalid("--alphas entries must lie in (0, 1)");
  char* csv = nullptr;
  check(scv_discrimination_csv(a.m, s.sigma, s.sigma_x, a.grid.empty() ? nullptr : a.grid.data(), a.grid.size(),
                               a.alphas.data(), a.alphas.size(), k, scv_seed{s.master_seed, nullptr, 0}, &csv));
  write_text(a.output, take(StringPtr(csv)));
}

struct ScoreArgs {
  std::string input;
  std::string output;
  std::string report;
  std::string partials;
  bool resume = false;
  std::string export_dir;
};

struct ScoreCallbackState {
  std::ofstream* partials = nullptr;
  std::string export_dir;
  std::mutex export_mutex;
  std::optional<CliError> error;
};

void on_partial(void* user, size_t k, double partial) {
  auto* st = static_cast<ScoreCallbackState*>(user);
  if (!st->partials) return;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, partial);
  *st->partials << buf;
  st->partials->flush();
}

void on_sample(void* user, size_t index, const scv_tensor* sample) {
  auto* st = static_cast<ScoreCallbackState*>(user);
  const auto path = fs::path(st->export_dir) / ("sample_" + std::to_string(index) + ".ft64");
  if (scv_tensor_write(sample, path.c_str()) != SCV_OK) {
    std::lock_guard lock(st->export_mutex);
    if (!st->error) st->error = CliError{kIo, "io", scv_last_error()};
  }
}

std::map<std::size_t, double> read_partials(const std::string& path) {
  std::map<std::size_t, double> out;
  if (!fs::exists(path)) return out;
  std::istringstream in(read_text(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      std::size_t used = 0;
      const auto k = std::stoull(line.substr(0, comma), &used);
      const std::string v = line.substr(comma + 1);
      std::size_t used_v = 0;
      out[k] = std::stod(v, &used_v);
      if (used != comma || used_v != v.size()) throw std::invalid_argument(line);
    } catch (const std::logic_error&) {
      throw CliError{kIo, "format", path + ":" + std::to_string(line_no) + ": expected k,partial"};
    }
  }
  return out;
}

void cmd_score(const Config& c, const ScoreArgs& a) {
  const Settings s = resolve(c);
  const auto y = read_tensor(a.input);
  const auto model = build_model(s, y.get());
  ScoreConfigHolder h;
  fill_score_config(s, h);

  ScoreCallbackState state;
  std::vector<std::size_t> resume_k;
  std::vector<double> resume_v;
  if (a.resume) {
    if (a.partials.empty()) invalid("--resume needs --partials");
    for (const auto& [k, v] : read_partials(a.partials)) {
      if (k >= s.k) invalid("partials file holds realization " + std::to_string(k) + " but K is " +
                            std::to_string(s.k));
      resume_k.push_back(k);
      resume_v.push_back(v);
    }
    h.config.resume_k = resume_k.data();
    h.config.resume_partials = resume_v.data();
    h.config.resume_count = resume_k.size();
  }
  std::ofstream partials;
  if (!a.partials.empty()) {
    partials.open(a.partials, std::ios::binary | std::ios::trunc);
    if (!partials) throw CliError{kIo, "io", "cannot open '" + a.partials + "' for writing"};
    state.partials = &partials;
  }
  if (!a.export_dir.empty()) {
    std::error_code ec;
    fs::create_directories(a.export_dir, ec);
    if (ec) throw CliError{kIo, "io", "cannot create '" + a.export_dir + "': " + ec.message()};
    state.export_dir = a.export_dir;
    h.config.on_sample = on_sample;
  }
  h.config.on_partial = on_partial;
  h.config.user = &state;

  scv_report* report = nullptr;
  check(scv_score(model.get(), y.get(), &h.config, &report));
  ReportPtr owned(report);
  if (state.error) throw *state.error;

  char* csv = nullptr;
  check(scv_report_csv(report, &csv));
  write_text(a.output, take(StringPtr(csv)));
  if (!a.report.empty()) {
    char* json = nullptr;
    check(scv_report_json(report, &json));
    write_text(a.report, take(StringPtr(json)));
  }
}

const std::vector<std::string> kDefaultKernels = {"gaussian:2", "gaussian:2.5", "uniform:3", "laplace:0.4",
                                                  "moffat:0.5,1"};

struct SelectArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> kernels;
  std::string output;
};

void cmd_select_kernel(const Config& c, const SelectArgs& a) {
  const Settings s = resolve(c);
  const auto ys = read_all(a.inputs);
  if (ys.empty()) invalid("--input matched no measurement files");
  const auto& kernels = a.kernels.empty() ? kDefaultKernels : a.kernels;
  if (kernels.size() < 2) invalid("--kernel must be given at least twice");
  std::vector<const char*> specs;
  for (const auto& k : kernels) specs.push_back(k.c_str());

  const scv_tensor* first = ys.front().get();
  const scv_model_config mc = model_config(s);
  std::vector<scv_model*> models(kernels.size(), nullptr);
  check(scv_kernel_models(specs.data(), specs.size(), scv_tensor_shape(first), scv_tensor_ndim(first), &mc,
                          models.data()));
  std::vector<ModelPtr> owned;
  for (auto* m : models) owned.emplace_back(m);

  ScoreConfigHolder h;
  fill_score_config(s, h);
  const auto measurements = raw(ys);
  char* csv = nullptr;
  std::size_t best = 0;
  check(scv_select(models.data(), models.size(), measurements.data(), measurements.size(), &h.config, &csv, &best));
  write_text(a.output, take(StringPtr(csv)));
}

struct OodArgs {
  std::vector<std::string> reference, in_dist, out_dist;
  std::size_t toy_m = 0;
  std::size_t count = 200;
  double ood_scale = 4.0;
  std::vector<double> alphas;
  std::string output;
  std::string items_output;
};

void cmd_ood_test(const Config& c, const OodArgs& a) {
  const Settings s = resolve(c, 1.0, 1.0, 0.1, 10, 20, 20);
  if (s.metric == "phi3") invalid("--metric must be phi1 or phi2 for the OOD test");
  std::vector<TensorPtr> ref, id, ood;
  ModelPtr model;
  if (a.toy_m > 0) {
    if (!a.reference.empty() || !a.in_dist.empty() || !a.out_dist.empty())
      invalid("--toy-m cannot be combined with population files");
    if (a.count < 1) invalid("--count must be >= 1");
    if (!(a.ood_scale > 0)) invalid("--ood-scale must be positive");
    auto population = [&](double sigma_x, std::uint64_t tag) {
      const std::uint64_t path[] = {tag};
      std::vector<scv_tensor*> items(a.count, nullptr);
      check(scv_toy_population(a.toy_m, s.sigma, sigma_x, a.count, scv_seed{s.master_seed, path, 1}, items.data()));
      std::vector<TensorPtr> out;
      for (auto* t : items) out.emplace_back(t);
      return out;
    };
    ref = population(s.sigma_x, 100);
    id = population(s.sigma_x, 101);
    ood = population(a.ood_scale * s.sigma_x, 102);
    scv_model* m = nullptr;
    check(scv_toy_model(a.toy_m, s.sigma, s.sigma_x, &m));
    model.reset(m);
  } else {
    ref = read_all(a.reference);
    id = read_all(a.in_dist);
    ood = read_all(a.out_dist);
    if (ref.empty() || id.empty() || ood.empty())
      invalid("--reference, --id and --ood must each name at least one measurement (or use --toy-m)");
    model = build_model(s, ref.front().get());
  }

  ScoreConfigHolder h;
  fill_score_config(s, h);
  const auto r = raw(ref), i = raw(id), o = raw(ood);
  if (a.alphas.size() > 1) {
    for (double al : a.alphas)
      if (!(al > 0 && al < 1)) invalid("--alphas entries must lie in (0, 1)");
    char* csv = nullptr;
    check(scv_alpha_sweep(model.get(), r.data(), r.size(), i.data(), i.size(), o.data(), o.size(), &h.config,
                          s.percentile, a.alphas.data(), a.alphas.size(), &csv));
    write_text(a.output, take(StringPtr(csv)));
    return;
  }
  if (a.alphas.size() == 1) {
    if (!(a.alphas[0] > 0 && a.alphas[0] < 1)) invalid("--alphas entries must lie in (0, 1)");
    h.config.alpha = a.alphas[0];
  }
  scv_ood_result result{};
  check(scv_ood_test(model.get(), r.data(), r.size(), i.data(), i.size(), o.data(), o.size(), &h.config,
                     s.percentile, &result));
  const std::string rates = result.rates_csv, items = result.items_csv;
  scv_ood_result_clear(&result);
  write_text(a.output, rates);
  if (!a.items_output.empty()) write_text(a.items_output, items);
}

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += ch;
    }
  }
  return out + '"';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splitcv: data-fission scoring of Bayesian imaging models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(scv_version()));

  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value config file");
  std::map<std::string, std::string> flag_values;
  for (const auto& key : kConfigKeys) app.add_option(flag_name(key), flag_values[key], "Config key " + key);
  app.add_option("--seed", flag_values["master_seed"], "Alias of --master-seed");

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Split a measurement into y_plus, y_minus and w");
  split->add_option("--input,-i", split_args.input, "Measurement (FT64 or PGM)")->required();
  split->add_option("--out-dir,-o", split_args.out_dir, "Output directory");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-check", "Monte Carlo convergence of the predictive estimator");
  oracle->add_option("--m", oracle_args.dims, "Dimensions m");
  oracle->add_option("--alphas", oracle_args.alphas, "Splitting parameters")->delimiter(',');
  oracle->add_option("--n-max", oracle_args.n_max, "Largest sample count");
  oracle->add_option("--k", oracle_args.k, "Noise realizations averaged");
  oracle->add_option("--output,-o", oracle_args.output, "CSV path (default stdout)");

  DiscriminateArgs disc_args;
  auto* disc = app.add_subcommand("discriminate", "Log predictive ratio against a misspecified prior scale");
  disc->add_option("--m", disc_args.m, "Dimension m");
  disc->add_option("--k", disc_args.k, "Noise realizations");
  disc->add_option("--alphas", disc_args.alphas, "Splitting parameters")->delimiter(',');
  disc->add_option("--grid", disc_args.grid, "sigma_x' values")->delimiter(',');
  disc->add_option("--output,-o", disc_args.output, "CSV path (default stdout)");

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score one model on one measurement");
  score->add_option("--input,-i", score_args.input, "Measurement (FT64 or PGM)")->required();
  score->add_option("--output,-o", score_args.output, "Score CSV path (default stdout)");
  score->add_option("--report", score_args.report, "JSON report path");
  score->add_option("--partials", score_args.partials, "Per-realization partial sums, flushed as they complete");
  score->add_flag("--resume", score_args.resume, "Reuse realizations already in --partials");
  score->add_option("--export-samples", score_args.export_dir, "Directory for posterior draws");

  SelectArgs select_args;
  auto* select = app.add_subcommand("select-kernel", "Rank blur kernels by score");
  select->add_option("--input,-i", select_args.inputs, "Measurements or directories")->required();
  select->add_option("--kernel,-k", select_args.kernels, "Candidate family:p1[,p2][@support]");
  select->add_option("--output,-o", select_args.output, "Rankings CSV path (default stdout)");

  OodArgs ood_args;
  auto* ood = app.add_subcommand("ood-test", "Percentile-threshold out-of-distribution test");
  ood->add_option("--reference", ood_args.reference, "Reference measurements or directories");
  ood->add_option("--id", ood_args.in_dist, "In-distribution test measurements");
  ood->add_option("--ood", ood_args.out_dist, "Out-of-distribution test measurements");
  ood->add_option("--toy-m", ood_args.toy_m, "Generate conjugate toy populations of this dimension");
  ood->add_option("--count", ood_args.count, "Items per toy population");
  ood->add_option("--ood-scale", ood_args.ood_scale, "Prior scale multiplier of the toy OOD population");
  ood->add_option("--alphas", ood_args.alphas, "Splitting parameters (several: rates per alpha)")->delimiter(',');
  ood->add_option("--output,-o", ood_args.output, "Rates CSV path (default stdout)");
  ood->add_option("--items-output", ood_args.items_output, "Per-item CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "splitcv-error code=" << kValidation << " kind=usage message=" << json_quote(e.what()) << "\n";
    return kValidation;
  }

  try {
    Config config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& key : kConfigKeys)
      if (app.get_option(flag_name(key))->count() > 0) config.set_flag(key, flag_values[key]);
    if (app.get_option("--seed")->count() > 0) config.set_flag("master_seed", flag_values["master_seed"]);

    if (split->parsed()) cmd_split(config, split_args);
    else if (oracle->parsed()) cmd_oracle_check(config, oracle_args);
    else if (disc->parsed()) cmd_discriminate(config, disc_args);
    else if (score->parsed()) cmd_score(config, score_args);
    else if (select->parsed()) cmd_select_kernel(config, select_args);
    else if (ood->parsed()) cmd_ood_test(config, ood_args);
  } catch (const CliError& e) {
    std::cerr << "splitcv-error code=" << e.code << " kind=" << e.kind << " message=" << json_quote(e.message)
              << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "splitcv-error code=" << kIo << " kind=internal message=" << json_quote(e.what()) << "\n";
    return kIo;
  }
  return kOk;
}
