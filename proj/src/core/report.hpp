#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/experiments.hpp"
#include "core/gaussian_oracle.hpp"
#include "core/scoring.hpp"

namespace splitcv {

const char* version();

// Shortest round-trip form, "%.17g".
std::string format_double(double v);

// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& text);
std::vector<std::string> split_csv_line(const std::string& line);

// "# seed=<master>, version=<version>"
std::string provenance_line(const SeedSpec& seed);

// Every table ends with the provenance line.
std::string score_csv(std::span<const ScoreReport> reports);
std::string rankings_csv(std::span<const RankedCandidate> ranking, const SeedSpec& seed);
std::string rates_csv(std::span<const OodRun> runs, const SeedSpec& seed);
std::string items_csv(const OodRun& run, const SeedSpec& seed);
std::string convergence_csv(std::span<const ConvergenceRow> rows, const SeedSpec& seed);
std::string discrimination_csv(std::span<const DiscriminationRow> rows, const SeedSpec& seed);
// k,partial lines for one realization at a time; see parse_partials.
std::string partial_line(std::size_t k, double partial);
std::map<std::size_t, double> parse_partials(const std::string& text);

// Inverse of items_csv (labels "id"/"ood").
std::vector<LabeledScore> parse_items_csv(const std::string& text);

std::string score_report_json(const ScoreReport& report, const SampleDiagnostics* diagnostics = nullptr);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace splitcv
