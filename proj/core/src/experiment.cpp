#include "ringsync/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "ringsync/csv.hpp"
#include "ringsync/rng.hpp"
#include "ringsync/simulation.hpp"

namespace ringsync::experiment {

namespace fs = std::filesystem;

namespace {

// Rates produced by lo:hi:step accumulate binary error; snap them to 1e-9.
double snap_rate(double v) { return std::round(v * 1e9) / 1e9; }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(std::string_view key, std::string_view detail) {
  throw ValidationError(std::string(key) + ": " + std::string(detail));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    fail(key, "expected a number, got '" + std::string(v) + "'");
  return out;
}

std::int64_t to_int(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    fail(key, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

int to_int32(std::string_view key, std::string_view v) {
  const auto wide = to_int(key, v);
  if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
    fail(key, "value out of range");
  return static_cast<int>(wide);
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    fail(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

ProtocolChoice to_protocol(std::string_view v) {
  if (v == "sync") return ProtocolChoice::sync;
  if (v == "csma") return ProtocolChoice::csma;
  if (v == "both") return ProtocolChoice::both;
  fail("protocol", "expected sync, csma or both, got '" + std::string(v) + "'");
}

std::string_view to_string(ProtocolChoice p) {
  switch (p) {
    case ProtocolChoice::sync: return "sync";
    case ProtocolChoice::csma: return "csma";
    case ProtocolChoice::both: return "both";
  }
  return "both";
}

timing::CorrectionMode to_mode(std::string_view v) {
  if (v == "wiwi") return timing::CorrectionMode::wiwi;
  if (v == "none") return timing::CorrectionMode::none;
  if (v == "ntp_once") return timing::CorrectionMode::ntp_once;
  fail("skew_mode", "expected wiwi, none or ntp_once, got '" + std::string(v) + "'");
}

std::string_view to_string(timing::CorrectionMode m) {
  switch (m) {
    case timing::CorrectionMode::wiwi: return "wiwi";
    case timing::CorrectionMode::none: return "none";
    case timing::CorrectionMode::ntp_once: return "ntp_once";
  }
  return "none";
}

void apply(ExperimentConfig& c, std::string_view key, std::string_view v) {
  auto& r = c.ring;
  auto& s = c.skew;
  if (key == "protocol") c.protocol = to_protocol(v);
  else if (key == "bus_length") r.bus_length_words = to_int32(key, v);
  else if (key == "message_words") r.message_words = to_int32(key, v);
  else if (key == "nodes") r.node_count = to_int32(key, v);
  else if (key == "traffic_rate") {
    const double rate = to_double(key, v);
    if (!(rate >= 0.0 && rate <= 1.0)) fail(key, "must lie in [0, 1]");
    c.rates = {rate};
  }
  else if (key == "rates") c.rates = parse_rates(v);
  else if (key == "ap_interval") r.ap_interval_words = to_int32(key, v);
  else if (key == "sim_words") r.sim_length_words = to_int(key, v);
  else if (key == "seed") c.seeds = {to_uint(key, v)};
  else if (key == "seeds") {
    c.seeds.clear();
    for (auto part : split(v, ',')) c.seeds.push_back(to_uint(key, part));
  } else if (key == "node_positions") {
    r.node_positions.clear();
    if (!v.empty() && v != "random")
      for (auto part : split(v, ',')) r.node_positions.push_back(to_int32(key, part));
  } else if (key == "ap_origin") r.ap_origin_position = to_int32(key, v);
  else if (key == "output_dir") c.output_dir = fs::path(std::string(v));
  else if (key == "min_samples") {
    const auto n = to_int(key, v);
    if (n < 0) fail(key, "must be non-negative");
    c.min_samples = static_cast<std::size_t>(n);
  } else if (key == "trace_ticks") c.trace_ticks = to_int(key, v);
  else if (key == "skew_mode") s.mode = to_mode(v);
  else if (key == "drift_a") s.drift_a = to_double(key, v);
  else if (key == "drift_b") s.drift_b = to_double(key, v);
  else if (key == "offset_a") s.offset_a = to_double(key, v);
  else if (key == "offset_b") s.offset_b = to_double(key, v);
  else if (key == "noise_sd") s.noise_sd = to_double(key, v);
  else if (key == "correction_interval") s.correction_interval = to_double(key, v);
  else if (key == "ntp_residual_min") s.ntp_residual_min = to_double(key, v);
  else if (key == "ntp_residual_max") s.ntp_residual_max = to_double(key, v);
  else if (key == "latency_a") s.latency_a = to_double(key, v);
  else if (key == "latency_b") s.latency_b = to_double(key, v);
  else if (key == "duration") s.lab.duration = to_double(key, v);
  else if (key == "sample_interval") s.lab.sample_interval = to_double(key, v);
  else if (key == "bit_duration") s.lab.bit_duration = to_double(key, v);
  else if (key == "pulse_period") s.lab.pulse_period = to_double(key, v);
  else if (key == "propagation_delay") s.lab.propagation_delay = to_double(key, v);
  else throw ValidationError("unknown key '" + std::string(key) + "'");
}

void check_ranges(const ExperimentConfig& c) {
  validate(c.ring);
  if (c.rates.empty()) fail("rates", "at least one rate is required");
  for (double r : c.rates)
    if (!(r >= 0.0 && r <= 1.0)) fail("rates", "each rate must lie in [0, 1]");
  if (c.seeds.empty()) fail("seeds", "at least one seed is required");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
  if (c.trace_ticks < 0) fail("trace_ticks", "must be non-negative");
  const auto& lab = c.skew.lab;
  if (!(lab.duration > 0)) fail("duration", "must be positive");
  if (!(lab.sample_interval > 0)) fail("sample_interval", "must be positive");
  if (!(lab.bit_duration > 0)) fail("bit_duration", "must be positive");
  if (!(lab.pulse_period > 0)) fail("pulse_period", "must be positive");
  if (!(lab.propagation_delay >= 0)) fail("propagation_delay", "must be non-negative");
  timing::validate(c.skew.clock_a());
  timing::validate(c.skew.clock_b());
}

std::string rate_tag(double rate) { return csv::format(rate); }

fs::path prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ValidationError("output_dir: cannot create '" + dir.string() + "'");
  const fs::path probe = dir / ".ringsync_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ValidationError("output_dir: '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("output_dir: cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<Protocol> protocols_of(ProtocolChoice choice) {
  switch (choice) {
    case ProtocolChoice::sync: return {Protocol::sync};
    case ProtocolChoice::csma: return {Protocol::csma};
    case ProtocolChoice::both: return {Protocol::sync, Protocol::csma};
  }
  return {};
}

timing::ClockModel SkewParams::clock_a() const {
  timing::ClockModel m;
  m.initial_offset = offset_a;
  m.drift_rate = drift_a;
  m.correction_mode = mode;
  m.correction_noise_sd = noise_sd;
  m.correction_interval = correction_interval;
  m.ntp_residual_min = ntp_residual_min;
  m.ntp_residual_max = ntp_residual_max;
  m.fixed_latency = latency_a;
  return m;
}

timing::ClockModel SkewParams::clock_b() const {
  timing::ClockModel m = clock_a();
  m.initial_offset = offset_b;
  m.drift_rate = drift_b;
  m.fixed_latency = latency_b;
  return m;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  for (int i = 1; i <= 99; ++i) c.rates.push_back(snap_rate(i * 0.01));
  const char* env = std::getenv(kOutputDirEnv);
  c.output_dir = (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("ringsync_out");
  return c;
}

std::vector<double> parse_rates(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) fail("rates", "range form is lo:hi:step");
    const double lo = to_double("rates", parts[0]);
    const double hi = to_double("rates", parts[1]);
    const double step = to_double("rates", parts[2]);
    if (!(step > 0)) fail("rates", "step must be positive");
    if (hi < lo) fail("rates", "hi must not be below lo");
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1'000'000) fail("rates", "too many rates");
    for (std::int64_t i = 0; i <= count; ++i) out.push_back(snap_rate(lo + i * step));
  } else {
    for (auto part : split(text, ',')) out.push_back(to_double("rates", part));
  }
  return out;
}

ExperimentConfig validate_config(std::string_view text, std::span<const Override> overrides) {
  ExperimentConfig c = default_config();
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    ++line_no;
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      const std::string_view pair = line.substr(i, j - i);
      i = j;
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                              std::string(pair) + "'",
                          line_no);
      try {
        apply(c, pair.substr(0, eq), pair.substr(eq + 1));
      } catch (const ValidationError& e) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
    }
    if (end == text.size()) break;
  }

  for (const auto& [key, value] : overrides) {
    try {
      apply(c, key, value);
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("override: ") + e.what(), 0);
    }
  }

  try {
    check_ranges(c);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

std::string manifest_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto& r = c.ring;
  const auto& s = c.skew;
  auto join = [](const auto& values) {
    std::string joined;
    for (const auto& v : values) {
      if (!joined.empty()) joined += ',';
      joined += csv::format(v);
    }
    return joined;
  };
  out << "# ringsync manifest\n";
  out << "protocol=" << to_string(c.protocol) << '\n';
  out << "bus_length=" << r.bus_length_words << '\n';
  out << "message_words=" << r.message_words << '\n';
  out << "nodes=" << r.node_count << '\n';
  out << "rates=" << join(c.rates) << '\n';
  out << "ap_interval=" << r.ap_interval_words << '\n';
  out << "sim_words=" << r.sim_length_words << '\n';
  out << "seeds=" << join(c.seeds) << '\n';
  out << "node_positions=" << (r.node_positions.empty() ? std::string("random") : join(r.node_positions))
      << '\n';
  out << "ap_origin=" << r.ap_origin_position << '\n';
  out << "output_dir=" << c.output_dir.string() << '\n';
  out << "min_samples=" << c.min_samples << '\n';
  out << "trace_ticks=" << c.trace_ticks << '\n';
  out << "skew_mode=" << to_string(s.mode) << '\n';
  out << "drift_a=" << csv::format(s.drift_a) << '\n';
  out << "drift_b=" << csv::format(s.drift_b) << '\n';
  out << "offset_a=" << csv::format(s.offset_a) << '\n';
  out << "offset_b=" << csv::format(s.offset_b) << '\n';
  out << "noise_sd=" << csv::format(s.noise_sd) << '\n';
  out << "correction_interval=" << csv::format(s.correction_interval) << '\n';
  out << "ntp_residual_min=" << csv::format(s.ntp_residual_min) << '\n';
  out << "ntp_residual_max=" << csv::format(s.ntp_residual_max) << '\n';
  out << "latency_a=" << csv::format(s.latency_a) << '\n';
  out << "latency_b=" << csv::format(s.latency_b) << '\n';
  out << "duration=" << csv::format(s.lab.duration) << '\n';
  out << "sample_interval=" << csv::format(s.lab.sample_interval) << '\n';
  out << "bit_duration=" << csv::format(s.lab.bit_duration) << '\n';
  out << "pulse_period=" << csv::format(s.lab.pulse_period) << '\n';
  out << "propagation_delay=" << csv::format(s.lab.propagation_delay) << '\n';
  return out.str();
}

ExperimentOutputs run_experiment(const ExperimentConfig& config) {
  check_ranges(config);
  const fs::path dir = prepare_output_dir(config.output_dir);

  std::vector<double> rates = config.rates;
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

  ExperimentOutputs outputs;
  for (Protocol protocol : protocols_of(config.protocol)) {
    std::vector<metrics::RateRecords> sets;
    for (double rate : rates) {
      metrics::RateRecords pooled;
      pooled.protocol = protocol;
      pooled.traffic_rate = rate;
      for (std::uint64_t seed : config.seeds) {
        RingConfig rc = config.ring;
        rc.traffic_rate = rate;
        rc.seed = seed;
        const std::string stem = std::string(to_string(protocol)) + "_r" + rate_tag(rate) + "_s" +
                                 std::to_string(seed);

        RunOptions options;
        options.min_delivered = config.min_samples;
        std::ofstream trace;
        if (config.trace_ticks > 0) {
          trace = open_for_write(dir / ("trace_" + stem + ".txt"));
          options.on_tick = [&trace, limit = config.trace_ticks](const RingState& state) {
            if (state.tick() < limit) trace << state.tick() << ' ' << state.bus.render() << '\n';
          };
        }

        const RunResult run = run_simulation(rc, protocol, options);
        const fs::path log = dir / ("events_" + stem + ".csv");
        auto out = open_for_write(log);
        metrics::write_event_log(out, run);
        outputs.run_logs.push_back(log);
        outputs.run_stats.push_back(run.stats);

        auto records = metrics::wait_records(run);
        pooled.records.insert(pooled.records.end(), records.begin(), records.end());
        pooled.undelivered += run.stats.undelivered;
      }
      sets.push_back(std::move(pooled));
    }

    const auto rows = metrics::sweep_summarize(sets);
    const fs::path summary = dir / ("summary_" + std::string(to_string(protocol)) + ".csv");
    auto out = open_for_write(summary);
    metrics::write_summary_csv(out, rows);
    outputs.summaries.push_back(summary);
    outputs.summary_rows.insert(outputs.summary_rows.end(), rows.begin(), rows.end());
  }

  outputs.manifest = dir / "manifest.txt";
  auto out = open_for_write(outputs.manifest);
  out << manifest_text(config);
  return outputs;
}

SkewOutputs run_skew_experiment(const ExperimentConfig& config) {
  check_ranges(config);
  const fs::path dir = prepare_output_dir(config.output_dir);
  SkewOutputs outputs;
  outputs.series = timing::run_skew_lab(config.skew.clock_a(), config.skew.clock_b(),
                                        config.skew.lab, config.seeds.front());
  outputs.csv = dir / "skew.csv";
  {
    auto out = open_for_write(outputs.csv);
    timing::write_skew_csv(out, outputs.series);
  }
  outputs.manifest = dir / "manifest.txt";
  auto out = open_for_write(outputs.manifest);
  out << manifest_text(config);
  return outputs;
}

}  // namespace ringsync::experiment
