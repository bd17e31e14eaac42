#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ringsync/experiment.hpp"

namespace ringsync::experiment {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("ringsync_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(ValidateConfig, EmptyTextGivesDefaults) {
  const auto c = validate_config("");
  EXPECT_EQ(c.ring.bus_length_words, 100);
  EXPECT_EQ(c.ring.message_words, 105);
  EXPECT_EQ(c.ring.ap_interval_words, 105);
  EXPECT_EQ(c.ring.node_count, 10);
  EXPECT_EQ(c.ring.sim_length_words, 1'000'000);
  EXPECT_EQ(c.protocol, ProtocolChoice::both);
  ASSERT_EQ(c.rates.size(), 99u);
  EXPECT_EQ(c.rates.front(), 0.01);
  EXPECT_EQ(c.rates[49], 0.5);
  EXPECT_EQ(c.rates.back(), 0.99);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{1});
  EXPECT_EQ(c.min_samples, 1500u);
}

TEST(ValidateConfig, OutOfRangeRateNamesTheField) {
  const auto msg = error_of([] { validate_config("traffic_rate=1.5"); });
  EXPECT_NE(msg.find("traffic_rate"), std::string::npos) << msg;
}

TEST(ValidateConfig, SeveralPairsPerLine) {
  const auto c = validate_config("nodes=10 bus_length=100\n");
  EXPECT_EQ(c.ring.node_count, 10);
  EXPECT_EQ(c.ring.bus_length_words, 100);
}

TEST(ValidateConfig, UnknownKeyReportsLine) {
  try {
    validate_config("# comment\nnodes=10\nwidget=3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("widget"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ValidateConfig, MalformedPairReportsLine) {
  try {
    validate_config("nodes=10\n\n  seed\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  try {
    validate_config("nodes=ten\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_NE(std::string(e.what()).find("nodes"), std::string::npos);
  }
}

TEST(ValidateConfig, CrossFieldErrorsNameTheField) {
  EXPECT_NE(error_of([] { validate_config("nodes=101"); }).find("nodes"), std::string::npos);
  EXPECT_NE(error_of([] { validate_config("nodes=3 node_positions=1,1,2"); }).find("node_positions"),
            std::string::npos);
  EXPECT_NE(error_of([] { validate_config("rates=0.2,1.2"); }).find("rates"), std::string::npos);
  EXPECT_NE(error_of([] { validate_config("protocol=token"); }).find("protocol"), std::string::npos);
  EXPECT_NE(error_of([] { validate_config("duration=0"); }).find("duration"), std::string::npos);
}

TEST(ValidateConfig, OverridesWin) {
  const std::vector<Override> o{{"nodes", "4"}, {"rates", "0.1:0.3:0.1"}};
  const auto c = validate_config("nodes=10\nrates=0.5\n", o);
  EXPECT_EQ(c.ring.node_count, 4);
  EXPECT_EQ(c.rates, (std::vector<double>{0.1, 0.2, 0.3}));
  const std::vector<Override> bad{{"gizmo", "1"}};
  EXPECT_THROW(validate_config("", bad), ConfigError);
}

TEST(ParseRates, RangeAndList) {
  const auto r = parse_rates("0.1:0.9:0.1");
  ASSERT_EQ(r.size(), 9u);
  for (int i = 0; i < 9; ++i) EXPECT_EQ(r[static_cast<std::size_t>(i)], (i + 1) / 10.0);
  EXPECT_EQ(parse_rates("0.2, 0.7"), (std::vector<double>{0.2, 0.7}));
  EXPECT_EQ(parse_rates("0.01:0.99:0.01").size(), 99u);
  EXPECT_THROW(parse_rates("0.1:0.2"), ValidationError);
  EXPECT_THROW(parse_rates("0.1:0.2:0"), ValidationError);
}

TEST(Manifest, RoundTripsThroughValidateConfig) {
  const auto c = validate_config(
      "protocol=csma nodes=6 bus_length=60 rates=0.15,0.35 seeds=4,9\n"
      "node_positions=1,7,19,33,40,59 ap_origin=3 sim_words=12345 output_dir=/tmp/x\n"
      "skew_mode=ntp_once drift_b=4.1667e-6 latency_a=3e-7 min_samples=10\n");
  const std::string text = manifest_text(c);
  const auto again = validate_config(text);
  EXPECT_EQ(manifest_text(again), text);
  EXPECT_EQ(again.ring.node_positions, c.ring.node_positions);
  EXPECT_EQ(again.rates, c.rates);
  EXPECT_EQ(again.skew.drift_b, 4.1667e-6);
}

ExperimentConfig small_sweep(const fs::path& dir) {
  const std::vector<Override> o{{"rates", "0.1:0.9:0.1"},
                                {"sim_words", "20000"},
                                {"seed", "42"},
                                {"min_samples", "0"},
                                {"output_dir", dir.string()}};
  return validate_config("protocol=both", o);
}

TEST(RunExperiment, SweepWritesEighteenLogsAndTwoSummaries) {
  const auto dir = scratch("sweep");
  const auto out = run_experiment(small_sweep(dir));
  EXPECT_EQ(out.run_logs.size(), 18u);
  EXPECT_EQ(out.summaries.size(), 2u);
  for (const auto& p : out.run_logs) EXPECT_TRUE(fs::is_regular_file(p)) << p;
  EXPECT_TRUE(fs::is_regular_file(dir / "events_sync_r0.3_s42.csv"));
  EXPECT_TRUE(fs::is_regular_file(dir / "summary_csma.csv"));
  EXPECT_TRUE(fs::is_regular_file(dir / "manifest.txt"));

  // 9 rates x 2 metrics, plus the header.
  const std::string summary = slurp(dir / "summary_sync.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 19);
}

TEST(RunExperiment, ByteIdenticalAcrossInvocations) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto out_a = run_experiment(small_sweep(a));
  const auto out_b = run_experiment(small_sweep(b));
  ASSERT_EQ(out_a.run_logs.size(), out_b.run_logs.size());
  for (std::size_t i = 0; i < out_a.run_logs.size(); ++i)
    ASSERT_EQ(slurp(out_a.run_logs[i]), slurp(out_b.run_logs[i])) << out_a.run_logs[i];
  for (std::size_t i = 0; i < out_a.summaries.size(); ++i)
    ASSERT_EQ(slurp(out_a.summaries[i]), slurp(out_b.summaries[i]));
}

TEST(RunExperiment, ManifestReproducesTheOutputs) {
  const auto dir = scratch("manifest");
  const auto first = run_experiment(small_sweep(dir));
  const std::string log = slurp(first.run_logs[5]);
  auto config = validate_config(slurp(first.manifest));
  const auto rerun_dir = scratch("manifest_rerun");
  config.output_dir = rerun_dir;
  const auto second = run_experiment(config);
  EXPECT_EQ(slurp(second.run_logs[5]), log);
}

TEST(RunExperiment, UnwritableOutputDirIsAnError) {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  auto config = small_sweep(dir / "file" / "sub");
  EXPECT_THROW(run_experiment(config), ValidationError);
}

TEST(RunExperiment, TraceWritesOneLinePerTick) {
  const auto dir = scratch("trace");
  const std::vector<Override> o{{"protocol", "sync"}, {"traffic_rate", "0.9"},
                                {"sim_words", "2000"}, {"min_samples", "0"},
                                {"trace_ticks", "50"},  {"output_dir", dir.string()}};
  (void)run_experiment(validate_config("", o));
  const std::string trace = slurp(dir / "trace_sync_r0.9_s1.txt");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 50);
  EXPECT_EQ(trace.substr(0, 2), "0 ");
}

TEST(RunSkewExperiment, WritesCsv) {
  const auto dir = scratch("skew");
  const std::vector<Override> o{{"skew_mode", "none"}, {"drift_b", "2.5e-8"},
                                {"output_dir", dir.string()}};
  const auto out = run_skew_experiment(validate_config("", o));
  EXPECT_EQ(out.series.samples.size(), 101u);
  const std::string csv = slurp(out.csv);
  EXPECT_EQ(csv.rfind("true_time_s,skew_s,skew_bits\n", 0), 0u);
  EXPECT_NEAR(std::abs(out.series.skew_in_bits(out.series.samples.back())), 300.0, 1.0);
}

}  // namespace
}  // namespace ringsync::experiment
