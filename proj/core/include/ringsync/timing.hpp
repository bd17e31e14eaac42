#pragma once

// Two-way time transfer and drifting-oscillator clock emulation.
//
// All durations are in seconds, held as double.

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ringsync::timing {

/// Differences observed at the two sites of a two-way exchange.
struct TwttObservation {
  double delta_at_a = 0.0;  ///< local time at A minus B's timestamp on arrival
  double delta_at_b = 0.0;  ///< local time at B minus A's timestamp on arrival
};

struct TwttSolution {
  double time_difference = 0.0;    ///< T_B - T_A
  double propagation_delay = 0.0;  ///< one-way path delay

  friend bool operator==(const TwttSolution&, const TwttSolution&) = default;
};

/// Separates clock offset from path delay. Throws ValidationError on
/// non-finite input.
TwttSolution twtt_resolve(const TwttObservation& obs);

/// Forward model: what the two sites observe for a given true offset and
/// delay. Throws ValidationError if the delay is negative or an input is
/// non-finite.
TwttObservation twtt_observe(double true_offset, double true_delay);

enum class CorrectionMode {
  wiwi,      ///< periodic two-way correction with Gaussian residual
  none,      ///< free-running
  ntp_once,  ///< one calibration at t = 0, then free-running
};

/**
 * Oscillator description.
 *
 * Local time runs as `t * (1 + drift_rate) + offset`, where `offset` is
 * `initial_offset` in none mode and the most recent correction residual
 * otherwise. Corrections happen at true times k * correction_interval
 * (k >= 0) in wiwi mode and once at t = 0 in ntp_once mode.
 */
struct ClockModel {
  double initial_offset = 0.0;
  double drift_rate = 0.0;
  CorrectionMode correction_mode = CorrectionMode::none;
  double correction_noise_sd = 20e-12;
  double correction_interval = 1.0;
  /// Residual window for the single NTP calibration, drawn uniformly.
  double ntp_residual_min = -5e-3;
  double ntp_residual_max = 5e-3;
  /// Fixed device latency added to every message this node emits.
  double fixed_latency = 0.0;
};

/// Throws ValidationError when a field is out of range.
void validate(const ClockModel& model);

/**
 * A clock model bound to a noise stream. Correction residuals are drawn
 * from a counter-based generator keyed by `noise_key`, so local_time() is a
 * pure function of (model, key, true time).
 */
class DisciplinedClock {
 public:
  DisciplinedClock(ClockModel model, std::uint64_t noise_key);

  const ClockModel& model() const noexcept { return model_; }

  /// Local reading at true time t >= 0.
  double local_time(double true_time) const;

  /// First true time at which the local clock reads at least `reading`.
  /// Free-running modes may return a negative time; wiwi clamps to 0.
  double edge_time(double reading) const;

  /// Offset (local minus true) established by the correction at index k.
  double correction_offset(std::int64_t k) const;

 private:
  struct Segment {
    double start;   // true time the segment begins
    double offset;  // local - true at `start`
  };
  Segment segment_at(double true_time) const;
  Segment segment_index(std::int64_t k) const;

  ClockModel model_;
  std::uint64_t noise_key_;
  double ntp_residual_ = 0.0;
};

/// Uncorrected reading: true_time * (1 + drift_rate) + initial_offset,
/// with correction_mode honoured via a DisciplinedClock keyed by zero.
double local_time(const ClockModel& clock, double true_time);

struct SkewSample {
  double true_time = 0.0;
  double skew = 0.0;  ///< arrival(B) - arrival(A), seconds

  friend bool operator==(const SkewSample&, const SkewSample&) = default;
};

struct SkewSeries {
  std::vector<SkewSample> samples;
  double bit_duration = 50e-9;

  double skew_in_bits(const SkewSample& s) const { return s.skew / bit_duration; }

  friend bool operator==(const SkewSeries&, const SkewSeries&) = default;
};

struct SkewLabSettings {
  double duration = 600.0;
  double sample_interval = 6.0;
  double bit_duration = 50e-9;
  double pulse_period = 1.0;       ///< local seconds between emitted messages
  double propagation_delay = 0.0;  ///< identical for both directions
};

/**
 * Emulates two nodes emitting a message at each local pulse edge and
 * records arrival(B) - arrival(A). Sample j is taken at true time
 * j * sample_interval and measures the most recent pulse index at or before
 * that time. Deterministic for a fixed seed.
 */
SkewSeries run_skew_lab(const ClockModel& clock_a, const ClockModel& clock_b,
                        const SkewLabSettings& settings, std::uint64_t seed);

/// Convenience overload matching the common call shape.
SkewSeries run_skew_lab(const ClockModel& clock_a, const ClockModel& clock_b,
                        double duration, double sample_interval,
                        std::uint64_t seed);

/// CSV with header `true_time_s,skew_s,skew_bits`.
void write_skew_csv(std::ostream& out, const SkewSeries& series);

}  // namespace ringsync::timing
