#include "core/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace splitcv {

const char* version() { return SPLITCV_VERSION; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::string provenance_line(const SeedSpec& seed) {
  return "# seed=" + std::to_string(seed.master_seed) + ", version=" + version() + "\n";
}

std::string score_csv(std::span<const ScoreReport> reports) {
  std::string out = "model,metric,value,alpha,K,N,L,master_seed\n";
  for (const auto& r : reports) {
    out += csv_field(r.model_label) + ',' + to_string(r.metric) + ',' + format_double(r.value()) + ',' +
           format_double(r.alpha) + ',' + std::to_string(r.k_realizations) + ',' + std::to_string(r.n_samples) +
           ',' + std::to_string(r.l_samples) + ',' + std::to_string(r.seed.master_seed) + '\n';
  }
  return out + provenance_line(reports.empty() ? SeedSpec{} : reports.front().seed);
}

std::string rankings_csv(std::span<const RankedCandidate> ranking, const SeedSpec& seed) {
  std::string out = "candidate,score,rank,tie\n";
  for (const auto& c : ranking)
    out += csv_field(c.label) + ',' + format_double(c.score) + ',' + std::to_string(c.rank) + ',' +
           (c.tie ? "1" : "0") + '\n';
  return out + provenance_line(seed);
}

std::string rates_csv(std::span<const OodRun> runs, const SeedSpec& seed) {
  std::string out = "alpha,type1,power,n_id,n_ood\n";
  for (const auto& run : runs)
    out += format_double(run.alpha) + ',' + format_double(run.rates.type1) + ',' + format_double(run.rates.power) +
           ',' + std::to_string(run.rates.n_id) + ',' + std::to_string(run.rates.n_ood) + '\n';
  return out + provenance_line(seed);
}

std::string items_csv(const OodRun& run, const SeedSpec& seed) {
  std::string out = "item_id,label,metric,value\n";
  for (const auto& item : run.items)
    out += csv_field(item.item_id) + ',' + (item.is_ood ? "ood" : "id") + ',' + to_string(run.spec.statistic) + ',' +
           format_double(item.score) + '\n';
  return out + provenance_line(seed);
}

std::string convergence_csv(std::span<const ConvergenceRow> rows, const SeedSpec& seed) {
  std::string out = "alpha,m,N,K,rel_log_error\n";
  for (const auto& r : rows)
    out += format_double(r.alpha) + ',' + std::to_string(r.m) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.k) + ',' + format_double(r.rel_log_error) + '\n';
  return out + provenance_line(seed);
}

std::string discrimination_csv(std::span<const DiscriminationRow> rows, const SeedSpec& seed) {
  std::string out = "sigma_x_prime,alpha,mean_log_ratio,stderr\n";
  for (const auto& r : rows)
    out += format_double(r.sigma_x_prime) + ',' + format_double(r.alpha) + ',' + format_double(r.mean_log_ratio) +
           ',' + format_double(r.stderr_log_ratio) + '\n';
  return out + provenance_line(seed);
}

std::string partial_line(std::size_t k, double partial) {
  return std::to_string(k) + ',' + format_double(partial) + '\n';
}

namespace {

double parse_double_field(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::out_of_range&) {
    if (s == "-inf" || s == "inf") return s[0] == '-' ? -INFINITY : INFINITY;
  } catch (const std::invalid_argument&) {
  }
  fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": '" + s + "' is not a number");
}

template <typename F>
void for_each_data_line(const std::string& text, bool skip_header, F&& f) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    f(split_csv_line(line), line_no);
  }
}

}  // namespace

std::map<std::size_t, double> parse_partials(const std::string& text) {
  std::map<std::size_t, double> out;
  for_each_data_line(text, false, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 2) fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": expected k,partial");
    const double k = parse_double_field(f[0], line_no);
    if (k < 0 || k != std::floor(k)) fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": bad k");
    out[static_cast<std::size_t>(k)] = parse_double_field(f[1], line_no);
  });
  return out;
}

std::vector<LabeledScore> parse_items_csv(const std::string& text) {
  std::vector<LabeledScore> out;
  for_each_data_line(text, true, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 4) fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": expected 4 fields");
    if (f[1] != "id" && f[1] != "ood")
      fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": label must be id or ood");
    out.push_back({f[0], parse_double_field(f[3], line_no), f[1] == "ood"});
  });
  return out;
}

std::string score_report_json(const ScoreReport& report, const SampleDiagnostics* diagnostics) {
  nlohmann::ordered_json j;
  j["model"] = report.model_label;
  j["metric"] = to_string(report.metric);
  j["value"] = report.value();
  if (report.phi1) j["phi1"] = *report.phi1;
  if (report.phi2) j["phi2"] = *report.phi2;
  if (report.phi3_log) j["phi3_log"] = *report.phi3_log;
  j["alpha"] = report.alpha;
  j["K"] = report.k_realizations;
  j["N"] = report.n_samples;
  j["L"] = report.l_samples;
  j["master_seed"] = report.seed.master_seed;
  j["stream_path"] = report.seed.stream_path;
  j["partials"] = report.partials;
  if (diagnostics) {
    j["sampler"] = {{"kind", to_string(diagnostics->kind)},
                    {"step_size", diagnostics->step_size},
                    {"lipschitz", diagnostics->lipschitz},
                    {"step_within_bound", diagnostics->step_within_bound}};
  }
  j["version"] = version();
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace splitcv
