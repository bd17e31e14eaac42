#include "ringsync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "ringsync/csv.hpp"
#include "ringsync/errors.hpp"

namespace ringsync::metrics {

std::vector<WaitRecord> wait_records(const RunResult& run) {
  std::vector<WaitRecord> out;
  const Tick end = run.stats.window_end;
  for (const auto& m : run.messages) {
    if (m.created_at >= end || !m.delivered_at || *m.delivered_at >= end) continue;
    out.push_back(WaitRecord{.id = m.id,
                             .wait1 = *m.delivered_at - m.created_at,
                             .wait2 = *m.delivered_at - m.dequeued_at,
                             .traffic_rate = run.config.traffic_rate,
                             .protocol = run.protocol});
  }
  return out;
}

Tick nearest_rank(std::span<const Tick> sorted, double pct) {
  if (sorted.empty()) throw ValidationError("nearest_rank of empty data");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

RateSummary summarize(std::span<const WaitRecord> records, WaitMetric which) {
  if (records.empty()) throw ValidationError("summarize: no records");
  const double rate = records.front().traffic_rate;
  std::vector<Tick> values;
  values.reserve(records.size());
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.traffic_rate != rate) throw ValidationError("summarize: mixed traffic rates");
    values.push_back(r.value(which));
    sum += static_cast<double>(r.value(which));
  }
  std::sort(values.begin(), values.end());

  RateSummary s;
  s.protocol = records.front().protocol;
  s.metric = which;
  s.traffic_rate = rate;
  for (std::size_t i = 0; i < kDeciles; ++i) {
    s.percentiles[i] = nearest_rank(values, 10.0 * static_cast<double>(i));
  }
  s.min = values.front();
  s.max = values.back();
  s.mean = sum / static_cast<double>(values.size());
  s.sample_count = values.size();
  return s;
}

std::vector<RateSummary> sweep_summarize(std::span<const RateRecords> sets) {
  std::map<Protocol, double> last_rate;
  std::vector<RateSummary> out;
  out.reserve(sets.size() * 2);
  for (const auto& set : sets) {
    if (auto it = last_rate.find(set.protocol);
        it != last_rate.end() && set.traffic_rate < it->second) {
      throw ValidationError("sweep_summarize: rates must be ascending");
    }
    last_rate[set.protocol] = set.traffic_rate;
    for (auto metric : {WaitMetric::wait1, WaitMetric::wait2}) {
      RateSummary s;
      if (set.records.empty()) {
        s.protocol = set.protocol;
        s.metric = metric;
        s.traffic_rate = set.traffic_rate;
      } else {
        s = summarize(set.records, metric);
      }
      s.undelivered_count = set.undelivered;
      out.push_back(s);
    }
  }
  return out;
}

void write_event_log(std::ostream& out, const RunResult& run) {
  out << "message_id,source,destination,created_at,dequeued_at,delivered_at,wait1,wait2\n";
  for (const auto& m : run.messages) {
    const auto id = csv::format(m.id);
    const auto src = csv::format(m.source);
    const auto dst = csv::format(m.destination);
    const auto created = csv::format(m.created_at);
    const auto dequeued = m.dequeued_at >= 0 ? csv::format(m.dequeued_at) : std::string();
    std::string delivered, w1, w2;
    if (m.delivered_at) {
      delivered = csv::format(*m.delivered_at);
      w1 = csv::format(*m.delivered_at - m.created_at);
      w2 = csv::format(*m.delivered_at - m.dequeued_at);
    }
    csv::write_row(out, {id, src, dst, created, dequeued, delivered, w1, w2});
  }
}

void write_summary_csv(std::ostream& out, std::span<const RateSummary> rows) {
  out << "protocol,rate,metric";
  for (std::size_t i = 0; i < kDeciles; ++i) out << ",p" << i * 10;
  out << ",mean,max,samples,undelivered_count\n";
  for (const auto& s : rows) {
    out << to_string(s.protocol) << ',' << csv::format(s.traffic_rate) << ','
        << to_string(s.metric);
    for (auto p : s.percentiles) {
      out << ',';
      if (s.sample_count > 0) out << csv::format(p);
    }
    out << ',' << (s.sample_count > 0 ? csv::format(s.mean) : std::string()) << ','
        << (s.sample_count > 0 ? csv::format(s.max) : std::string()) << ','
        << csv::format(static_cast<std::int64_t>(s.sample_count)) << ','
        << csv::format(static_cast<std::int64_t>(s.undelivered_count)) << '\n';
  }
}

}  // namespace ringsync::metrics
