#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rehabkit/types.hpp"

namespace rehabkit {

/// Device configuration shared by a whole recording. The baseline of a
/// sampled channel is the value it reports when only gravity acts on the
/// sensor; baselines anchor zero-velocity detection.
struct DeviceConfig {
    double sampling_rate_hz = 102.4;
    double accel_range_g = 2.0;
    double gyro_range_dps = 500.0;
    /// Baselines for the six sampled channels (ax..gz), in channel units.
    std::array<double, kSampledChannelCount> baselines = {0.0, 0.0, 9.81, 0.0, 0.0, 0.0};

    void validate() const;
};

struct RawSample {
    double t;               // seconds
    double ax, ay, az;      // m/s^2
    double gx, gy, gz;      // deg/s
};

/// A continuous single-session recording with optional ground truth.
struct RawRecording {
    std::vector<RawSample> samples;
    std::string subject_id;
    Exercise exercise = Exercise::HS;
    std::optional<std::vector<Label>> rep_labels;
    std::optional<std::vector<std::pair<int, int>>> ground_truth_bounds;
    DeviceConfig device;

    std::size_t size() const { return samples.size(); }

    /// Checks timestamps (strictly increasing, spacing within 1% of the
    /// sampling period) and ground-truth bounds (sorted, non-overlapping).
    /// Throws DataError on violation.
    void validate() const;
};

enum class MagnitudeSource { gyro, accel };

/// Normalization bounds of one channel prior to min-max scaling.
struct ChannelBounds {
    double min = 0.0;
    double max = 0.0;
    bool degenerate() const { return !(max > min); }
};

/// Nine filtered, min-max-normalized signal vectors plus the provenance
/// needed to map device baselines into normalized units.
struct ProcessedRecording {
    std::array<std::vector<double>, kChannelCount> vectors;
    std::array<ChannelBounds, kChannelCount> bounds; // pre-normalization bounds
    double cutoff_hz = 5.0;
    int filter_order = 4;
    MagnitudeSource mag_source = MagnitudeSource::gyro;
    std::string subject_id;
    Exercise exercise = Exercise::HS;
    DeviceConfig device;

    std::size_t length() const { return vectors[0].size(); }
    const std::vector<double>& channel(Channel c) const { return vectors[index_of(c)]; }
};

/// Raw-unit resting value of any channel, derived from the device
/// baselines for MAG/PITCH/ROLL.
double channel_baseline(const DeviceConfig& device, Channel c, MagnitudeSource mag_source);

/// Image of the channel baseline after the recording's min-max scaling;
/// 0 when the channel range was degenerate.
double normalized_baseline(const ProcessedRecording& rec, Channel c);

} // namespace rehabkit
