#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ringsync/simulation.hpp"
#include "ringsync/types.hpp"

namespace ringsync::metrics {

enum class WaitMetric { wait1, wait2 };

constexpr std::string_view to_string(WaitMetric m) noexcept {
  return m == WaitMetric::wait1 ? "wait1" : "wait2";
}

struct WaitRecord {
  MessageId id = kNoMessage;
  Tick wait1 = 0;  ///< delivered_at - created_at
  Tick wait2 = 0;  ///< delivered_at - dequeued_at
  double traffic_rate = 0.0;
  Protocol protocol = Protocol::sync;

  Tick value(WaitMetric m) const noexcept { return m == WaitMetric::wait1 ? wait1 : wait2; }
};

inline constexpr std::size_t kDeciles = 11;

struct RateSummary {
  Protocol protocol = Protocol::sync;
  WaitMetric metric = WaitMetric::wait2;
  double traffic_rate = 0.0;
  /// Nearest-rank value at 0, 10, ..., 100 percent.
  std::array<Tick, kDeciles> percentiles{};
  Tick min = 0;
  Tick max = 0;
  double mean = 0.0;
  std::size_t sample_count = 0;
  std::size_t undelivered_count = 0;
};

/// Messages generated and delivered inside the run's window.
std::vector<WaitRecord> wait_records(const RunResult& run);

/// Nearest-rank percentile of ascending `sorted` (nonempty); pct in [0, 100].
Tick nearest_rank(std::span<const Tick> sorted, double pct);

/// Throws ValidationError on empty input or mixed rates.
RateSummary summarize(std::span<const WaitRecord> records, WaitMetric which);

/// Wait expressed in whole AP cycles, rounded up.
constexpr Tick to_ap_cycles(Tick wait_words, int ap_interval) noexcept {
  return (wait_words + ap_interval - 1) / ap_interval;
}

struct RateRecords {
  Protocol protocol = Protocol::sync;
  double traffic_rate = 0.0;
  std::vector<WaitRecord> records;
  std::size_t undelivered = 0;
};

/// Two summaries (wait1, wait2) per entry, in input order. Rates must be
/// ascending within each protocol.
std::vector<RateSummary> sweep_summarize(std::span<const RateRecords> sets);

/// Columns: message_id,source,destination,created_at,dequeued_at,
/// delivered_at,wait1,wait2. Undelivered messages leave the last three empty.
void write_event_log(std::ostream& out, const RunResult& run);

/// Columns: protocol,rate,metric,p0..p100,mean,max,samples,undelivered_count.
void write_summary_csv(std::ostream& out, std::span<const RateSummary> rows);

}  // namespace ringsync::metrics
