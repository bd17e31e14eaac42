#pragma once

// Configuration ingestion and experiment orchestration.
//
// Configuration is flat `key=value` text. Several pairs may share a line,
// separated by whitespace; `#` starts a comment. Command-line overrides use
// the same keys and win over the file.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ringsync/errors.hpp"
#include "ringsync/metrics.hpp"
#include "ringsync/ring_bus.hpp"
#include "ringsync/timing.hpp"

namespace ringsync::experiment {

/// Environment variable consulted for the default output directory.
inline constexpr const char* kOutputDirEnv = "RINGSYNC_OUTPUT_DIR";

enum class ProtocolChoice { sync, csma, both };

std::vector<Protocol> protocols_of(ProtocolChoice choice);

struct SkewParams {
  timing::CorrectionMode mode = timing::CorrectionMode::none;
  double drift_a = 0.0;
  double drift_b = 2.5e-8;
  double offset_a = 0.0;
  double offset_b = 0.0;
  double noise_sd = 20e-12;
  double correction_interval = 1.0;
  double ntp_residual_min = -5e-3;
  double ntp_residual_max = 5e-3;
  double latency_a = 0.0;
  double latency_b = 0.0;
  timing::SkewLabSettings lab;

  timing::ClockModel clock_a() const;
  timing::ClockModel clock_b() const;
};

struct ExperimentConfig {
  ProtocolChoice protocol = ProtocolChoice::both;
  RingConfig ring;
  std::vector<double> rates;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir;
  std::size_t min_samples = 1500;
  /// Ticks of textual ring trace written per run (0 disables).
  Tick trace_ticks = 0;
  SkewParams skew;
};

/// L=100, M=T_AP=105, N=10, rates 0.01..0.99, sim 10^6 words.
ExperimentConfig default_config();

/// Parse or range failure. line() is 1-based for file text, 0 for
/// command-line overrides and cross-field checks.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, int line)
      : ValidationError(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

using Override = std::pair<std::string, std::string>;

/// Parses `text`, then applies `overrides`, then range-checks every field.
ExperimentConfig validate_config(std::string_view text,
                                 std::span<const Override> overrides = {});

/// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_rates(std::string_view text);

/// Every key with its effective value; feeding it back to validate_config
/// reproduces the configuration.
std::string manifest_text(const ExperimentConfig& config);

struct ExperimentOutputs {
  std::vector<std::filesystem::path> run_logs;
  std::vector<std::filesystem::path> summaries;
  std::filesystem::path manifest;
  std::vector<metrics::RateSummary> summary_rows;
  std::vector<RunStats> run_stats;
};

/// One run per (protocol, rate, seed); writes event logs, one summary table
/// per protocol, and manifest.txt. Throws ValidationError if the output
/// directory cannot be written.
ExperimentOutputs run_experiment(const ExperimentConfig& config);

struct SkewOutputs {
  std::filesystem::path csv;
  std::filesystem::path manifest;
  timing::SkewSeries series;
};

/// Runs the skew lab with config.skew and the first seed; writes skew.csv.
SkewOutputs run_skew_experiment(const ExperimentConfig& config);

}  // namespace ringsync::experiment
