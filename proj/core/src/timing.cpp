#include "ringsync/timing.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "ringsync/csv.hpp"
#include "ringsync/errors.hpp"
#include "ringsync/rng.hpp"

namespace ringsync::timing {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
}

}  // namespace

TwttSolution twtt_resolve(const TwttObservation& obs) {
  require_finite(obs.delta_at_a, "delta_at_a");
  require_finite(obs.delta_at_b, "delta_at_b");
  return TwttSolution{
      .time_difference = (obs.delta_at_b - obs.delta_at_a) / 2.0,
      .propagation_delay = (obs.delta_at_b + obs.delta_at_a) / 2.0,
  };
}

TwttObservation twtt_observe(double true_offset, double true_delay) {
  require_finite(true_offset, "true_offset");
  require_finite(true_delay, "true_delay");
  if (true_delay < 0.0) throw ValidationError("true_delay must be >= 0");
  return TwttObservation{
      .delta_at_a = -true_offset + true_delay,
      .delta_at_b = true_offset + true_delay,
  };
}

void validate(const ClockModel& m) {
  require_finite(m.initial_offset, "initial_offset");
  require_finite(m.drift_rate, "drift_rate");
  require_finite(m.correction_noise_sd, "correction_noise_sd");
  require_finite(m.correction_interval, "correction_interval");
  require_finite(m.ntp_residual_min, "ntp_residual_min");
  require_finite(m.ntp_residual_max, "ntp_residual_max");
  require_finite(m.fixed_latency, "fixed_latency");
  if (m.drift_rate <= -1.0) throw ValidationError("drift_rate must be > -1");
  if (m.correction_noise_sd < 0.0) {
    throw ValidationError("correction_noise_sd must be >= 0");
  }
  if (m.correction_interval <= 0.0) {
    throw ValidationError("correction_interval must be > 0");
  }
  // Edge search assumes residuals are small against the correction period.
  if (m.correction_mode == CorrectionMode::wiwi &&
      m.correction_noise_sd * 100.0 > m.correction_interval) {
    throw ValidationError("correction_noise_sd must be below correction_interval / 100");
  }
  if (m.ntp_residual_min > m.ntp_residual_max) {
    throw ValidationError("ntp_residual_min must not exceed ntp_residual_max");
  }
}

DisciplinedClock::DisciplinedClock(ClockModel model, std::uint64_t noise_key)
    : model_(model), noise_key_(noise_key) {
  validate(model_);
  if (model_.correction_mode == CorrectionMode::ntp_once) {
    const double u = counter_uniform(noise_key_ ^ 0x4E5450ULL, 0);
    ntp_residual_ = model_.ntp_residual_min +
                    (model_.ntp_residual_max - model_.ntp_residual_min) * u;
  }
}

double DisciplinedClock::correction_offset(std::int64_t k) const {
  switch (model_.correction_mode) {
    case CorrectionMode::wiwi:
      if (model_.correction_noise_sd == 0.0) return 0.0;
      return model_.correction_noise_sd *
             counter_normal(noise_key_, static_cast<std::uint64_t>(k));
    case CorrectionMode::ntp_once:
      return ntp_residual_;
    case CorrectionMode::none:
      break;
  }
  return model_.initial_offset;
}

DisciplinedClock::Segment DisciplinedClock::segment_index(std::int64_t k) const {
  if (model_.correction_mode != CorrectionMode::wiwi) {
    return Segment{0.0, correction_offset(0)};
  }
  return Segment{static_cast<double>(k) * model_.correction_interval,
                 correction_offset(k)};
}

DisciplinedClock::Segment DisciplinedClock::segment_at(double true_time) const {
  if (model_.correction_mode != CorrectionMode::wiwi) return segment_index(0);
  const auto k = static_cast<std::int64_t>(
      std::floor(true_time / model_.correction_interval));
  return segment_index(k < 0 ? 0 : k);
}

double DisciplinedClock::local_time(double true_time) const {
  const Segment s = segment_at(true_time);
  return true_time + s.offset + model_.drift_rate * (true_time - s.start);
}

double DisciplinedClock::edge_time(double reading) const {
  const double rate = 1.0 + model_.drift_rate;
  auto solve = [&](const Segment& s) {
    return (reading - s.offset + model_.drift_rate * s.start) / rate;
  };
  // Free-running clocks extend affinely before t = 0.
  if (model_.correction_mode != CorrectionMode::wiwi) {
    return solve(segment_index(0));
  }
  if (local_time(0.0) >= reading) return 0.0;

  const double period = model_.correction_interval;
  auto k = static_cast<std::int64_t>(std::floor(reading / (rate * period))) - 1;
  if (k < 0) k = 0;
  // Step back while the previous segment already reaches the reading.
  auto segment_sup = [&](std::int64_t j) {
    const Segment s = segment_index(j);
    return s.start + period + s.offset + model_.drift_rate * period;
  };
  while (k > 0 && segment_sup(k - 1) >= reading) --k;
  for (;; ++k) {
    const Segment s = segment_index(k);
    const double start_reading = s.start + s.offset;
    if (start_reading >= reading) return s.start;
    const double t = solve(s);
    if (t < s.start + period) return t < s.start ? s.start : t;
  }
}

double local_time(const ClockModel& clock, double true_time) {
  return DisciplinedClock(clock, 0).local_time(true_time);
}

SkewSeries run_skew_lab(const ClockModel& clock_a, const ClockModel& clock_b,
                        const SkewLabSettings& settings, std::uint64_t seed) {
  if (!(settings.duration > 0.0)) throw ValidationError("duration must be > 0");
  if (!(settings.sample_interval > 0.0)) {
    throw ValidationError("sample_interval must be > 0");
  }
  if (!(settings.bit_duration > 0.0)) {
    throw ValidationError("bit_duration must be > 0");
  }
  if (!(settings.pulse_period > 0.0)) {
    throw ValidationError("pulse_period must be > 0");
  }
  require_finite(settings.propagation_delay, "propagation_delay");

  auto key_for = [seed](const ClockModel& m, std::uint64_t index) {
    const auto purpose = m.correction_mode == CorrectionMode::ntp_once
                             ? StreamPurpose::ntp_calibration
                             : StreamPurpose::clock_correction;
    return derive_seed(seed, purpose, index);
  };
  const DisciplinedClock a(clock_a, key_for(clock_a, 0));
  const DisciplinedClock b(clock_b, key_for(clock_b, 1));

  SkewSeries series;
  series.bit_duration = settings.bit_duration;
  const auto count = static_cast<std::int64_t>(
      std::floor(settings.duration / settings.sample_interval + 1e-9));
  series.samples.reserve(static_cast<std::size_t>(count + 1));
  for (std::int64_t j = 0; j <= count; ++j) {
    const double t = static_cast<double>(j) * settings.sample_interval;
    const double pulse = std::floor(t / settings.pulse_period + 1e-9);
    const double reading = pulse * settings.pulse_period;
    const double arrival_a =
        a.edge_time(reading) + settings.propagation_delay + clock_a.fixed_latency;
    const double arrival_b =
        b.edge_time(reading) + settings.propagation_delay + clock_b.fixed_latency;
    series.samples.push_back(SkewSample{t, arrival_b - arrival_a});
  }
  return series;
}

SkewSeries run_skew_lab(const ClockModel& clock_a, const ClockModel& clock_b,
                        double duration, double sample_interval,
                        std::uint64_t seed) {
  SkewLabSettings settings;
  settings.duration = duration;
  settings.sample_interval = sample_interval;
  return run_skew_lab(clock_a, clock_b, settings, seed);
}

void write_skew_csv(std::ostream& out, const SkewSeries& series) {
  out << "true_time_s,skew_s,skew_bits\n";
  for (const auto& s : series.samples) {
    const auto t = csv::format(s.true_time);
    const auto skew = csv::format(s.skew);
    const auto bits = csv::format(series.skew_in_bits(s));
    csv::write_row(out, {t, skew, bits});
  }
}

}  // namespace ringsync::timing
