// ringsync: run, sweep, skew and twtt subcommands.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ringsync/csv.hpp"
#include "ringsync/experiment.hpp"
#include "ringsync/timing.hpp"

namespace ex = ringsync::experiment;

namespace {

struct Flag {
  const char* key;
  const char* help;
};

// Every flag is the config key with '-' for '_'.
constexpr Flag kRingFlags[] = {
    {"protocol", "sync, csma or both"},
    {"bus_length", "ring length L in words"},
    {"message_words", "message length M in words"},
    {"nodes", "node count N"},
    {"ap_interval", "AP interval T_AP in words"},
    {"sim_words", "simulation length in words"},
    {"seed", "master seed"},
    {"seeds", "comma-separated master seeds"},
    {"node_positions", "comma-separated positions, or 'random'"},
    {"ap_origin", "ring position where AP slots are injected"},
    {"min_samples", "extend the window until this many deliveries"},
};

constexpr Flag kSkewFlags[] = {
    {"skew_mode", "wiwi, none or ntp_once"},
    {"drift_a", "fractional frequency offset of clock A"},
    {"drift_b", "fractional frequency offset of clock B"},
    {"offset_a", "initial offset of clock A (s)"},
    {"offset_b", "initial offset of clock B (s)"},
    {"noise_sd", "Wi-Wi correction residual sd (s)"},
    {"correction_interval", "Wi-Wi correction interval (s)"},
    {"ntp_residual_min", "lower end of the NTP residual window (s)"},
    {"ntp_residual_max", "upper end of the NTP residual window (s)"},
    {"latency_a", "fixed emission latency of node A (s)"},
    {"latency_b", "fixed emission latency of node B (s)"},
    {"duration", "experiment length (s)"},
    {"sample_interval", "sampling interval (s)"},
    {"bit_duration", "bit length (s)"},
    {"pulse_period", "local seconds between emitted messages"},
    {"propagation_delay", "path delay (s)"},
    {"seed", "master seed"},
};

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

struct Common {
  std::string config_path;
  std::string output_dir;
  std::map<std::string, std::string> values;
};

void add_flag(CLI::App* app, Common& common, const char* key, const char* help,
              const std::string& name_override = {}) {
  app->add_option(name_override.empty() ? flag_name(key) : name_override,
                  common.values[key], help);
}

void add_common(CLI::App* app, Common& common) {
  app->add_option("-c,--config", common.config_path, "key=value configuration file");
  app->add_option("-o,--output-dir", common.output_dir,
                  std::string("output directory (default $") + ex::kOutputDirEnv +
                      " or ringsync_out)");
}

ex::ExperimentConfig load(const Common& common, std::vector<ex::Override> extra = {}) {
  std::string text;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw ringsync::ValidationError("config: cannot read '" + common.config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::vector<ex::Override> overrides;
  for (const auto& [key, value] : common.values)
    if (!value.empty()) overrides.emplace_back(key, value);
  if (!common.output_dir.empty()) overrides.emplace_back("output_dir", common.output_dir);
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return ex::validate_config(text, overrides);
}

void print_summary(const ex::ExperimentOutputs& out) {
  std::cout << "protocol,rate,metric,mean,p90,max,samples,undelivered\n";
  for (const auto& row : out.summary_rows) {
    std::cout << ringsync::to_string(row.protocol) << ',' << ringsync::csv::format(row.traffic_rate)
              << ',' << ringsync::metrics::to_string(row.metric) << ','
              << ringsync::csv::format(row.mean) << ',' << row.percentiles[9] << ',' << row.max
              << ',' << row.sample_count << ',' << row.undelivered_count << '\n';
  }
  for (const auto& path : out.summaries) std::cout << "summary: " << path.string() << '\n';
  std::cout << "manifest: " << out.manifest.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-level ring bus simulator with AP arbitration and CSMA/CD"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, skew_opts;
  bool run_full = false, sweep_full = false;
  long long trace = 0;

  auto* run = app.add_subcommand("run", "single rate, one or both protocols");
  add_common(run, run_opts);
  for (const auto& f : kRingFlags) add_flag(run, run_opts, f.key, f.help);
  add_flag(run, run_opts, "traffic_rate", "traffic rate R", "-r,--rate");
  run->add_flag("--full-scale", run_full, "simulate 10^7 words");
  run->add_option("--trace", trace, "write a textual ring trace for the first N ticks");

  auto* sweep = app.add_subcommand("sweep", "rate sweep");
  add_common(sweep, sweep_opts);
  for (const auto& f : kRingFlags) add_flag(sweep, sweep_opts, f.key, f.help);
  add_flag(sweep, sweep_opts, "rates", "lo:hi:step or comma list");
  sweep->add_flag("--full-scale", sweep_full, "simulate 10^7 words");

  auto* skew = app.add_subcommand("skew", "two-node skew lab");
  add_common(skew, skew_opts);
  for (const auto& f : kSkewFlags)
    add_flag(skew, skew_opts, f.key, f.help,
             std::string(f.key) == "skew_mode" ? "--mode" : std::string{});

  double delta_a = 0, delta_b = 0;
  auto* twtt = app.add_subcommand("twtt", "resolve offset and delay from a two-way exchange");
  twtt->add_option("--delta-a", delta_a, "local time at A minus B's timestamp on arrival (s)")->required();
  twtt->add_option("--delta-b", delta_b, "local time at B minus A's timestamp on arrival (s)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<ex::Override> extra;
      if (run_full) extra.emplace_back("sim_words", "10000000");
      if (trace > 0) extra.emplace_back("trace_ticks", std::to_string(trace));
      auto config = load(run_opts, extra);
      if (config.rates.size() != 1)
        throw ringsync::ValidationError("rate: run takes exactly one rate; use --rate or sweep");
      print_summary(ex::run_experiment(config));
    } else if (sweep->parsed()) {
      std::vector<ex::Override> extra;
      if (sweep_full) extra.emplace_back("sim_words", "10000000");
      print_summary(ex::run_experiment(load(sweep_opts, extra)));
    } else if (skew->parsed()) {
      const auto out = ex::run_skew_experiment(load(skew_opts));
      const auto& s = out.series.samples;
      double max_dev = 0;
      for (const auto& sample : s)
        max_dev = std::max(max_dev, std::abs(out.series.skew_in_bits(sample) -
                                             out.series.skew_in_bits(s.front())));
      std::cout << "samples: " << s.size() << '\n'
                << "initial_skew_bits: " << ringsync::csv::format(out.series.skew_in_bits(s.front()))
                << '\n'
                << "final_skew_bits: " << ringsync::csv::format(out.series.skew_in_bits(s.back()))
                << '\n'
                << "max_abs_change_bits: " << ringsync::csv::format(max_dev) << '\n'
                << "csv: " << out.csv.string() << '\n';
    } else if (twtt->parsed()) {
      const auto sol = ringsync::timing::twtt_resolve({delta_a, delta_b});
      std::cout << "time_difference_s: " << ringsync::csv::format(sol.time_difference) << '\n'
                << "propagation_delay_s: " << ringsync::csv::format(sol.propagation_delay) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
