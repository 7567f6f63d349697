#include "rehabkit/recording.hpp"

#include <cmath>
#include <string>

#include "rehabkit/errors.hpp"

namespace rehabkit {

void DeviceConfig::validate() const {
    if (!(sampling_rate_hz > 0.0)) throw DataError("sampling_rate_hz must be positive");
    if (!(accel_range_g > 0.0)) throw DataError("accel_range_g must be positive");
    if (!(gyro_range_dps > 0.0)) throw DataError("gyro_range_dps must be positive");
}

void RawRecording::validate() const {
    device.validate();
    const double period = 1.0 / device.sampling_rate_hz;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double dt = samples[i].t - samples[i - 1].t;
        if (dt <= 0.0)
            throw DataError("non-monotonic timestamps at sample " + std::to_string(i));
        if (std::abs(dt - period) > 0.01 * period + 1e-12)
            throw DataError("non-uniform sample spacing at sample " + std::to_string(i));
    }
    if (ground_truth_bounds) {
        const auto& b = *ground_truth_bounds;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i].first >= b[i].second)
                throw DataError("empty ground-truth bound at index " + std::to_string(i));
            if (i > 0 && b[i].first < b[i - 1].second)
                throw DataError("overlapping ground-truth bounds at index " + std::to_string(i));
        }
        if (rep_labels && rep_labels->size() != b.size())
            throw DataError("rep_labels and ground_truth_bounds length mismatch");
    }
}

double channel_baseline(const DeviceConfig& device, Channel c, MagnitudeSource mag_source) {
    const auto& b = device.baselines;
    switch (c) {
    case Channel::AX: case Channel::AY: case Channel::AZ:
    case Channel::GX: case Channel::GY: case Channel::GZ:
        return b[index_of(c)];
    case Channel::MAG: {
        const int off = mag_source == MagnitudeSource::gyro ? index_of(Channel::GX) : 0;
        return std::sqrt(b[off] * b[off] + b[off + 1] * b[off + 1] + b[off + 2] * b[off + 2]);
    }
    case Channel::PITCH:
        return std::atan2(-b[0], std::sqrt(b[1] * b[1] + b[2] * b[2]));
    case Channel::ROLL:
        return std::atan2(b[1], b[2]);
    }
    return 0.0;
}

double normalized_baseline(const ProcessedRecording& rec, Channel c) {
    const ChannelBounds& cb = rec.bounds[index_of(c)];
    if (cb.degenerate()) return 0.0;
    const double raw = channel_baseline(rec.device, c, rec.mag_source);
    return (raw - cb.min) / (cb.max - cb.min);
}

} // namespace rehabkit
