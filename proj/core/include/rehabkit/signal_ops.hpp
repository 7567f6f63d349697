#pragma once

#include <array>
#include <span>
#include <vector>

#include "rehabkit/recording.hpp"

namespace rehabkit {

/// Digital IIR coefficients, denominator normalized to a[0] = 1.
struct IirCoeffs {
    std::vector<double> b;
    std::vector<double> a;
    int order() const { return static_cast<int>(a.size()) - 1; }
};

/// Lowpass Butterworth design via bilinear transform with cutoff
/// prewarping. Throws std::invalid_argument when cutoff_hz is not below
/// the Nyquist frequency.
IirCoeffs butterworth_design(double cutoff_hz, int order, double fs_hz);

/// Steady-state filter delay values (unit-step equilibrium) for a
/// direct-form-II-transposed realization; scaled by the first sample they
/// remove the startup transient.
std::vector<double> steady_state_delays(const IirCoeffs& c);

/// Single causal pass, direct form II transposed, with the given initial
/// delay values (empty = zero state).
std::vector<double> iir_filter(const IirCoeffs& c, std::span<const double> x,
                               std::span<const double> zi = {});

/// One forward pass with steady-state initialization (phase lag present).
std::vector<double> butterworth_forward(std::span<const double> signal, double cutoff_hz,
                                        int order, double fs_hz);

/// Zero-phase (forward-backward) lowpass. Input is extended on both ends
/// by edge-value reflection of length 3*order before each pass. DC gain
/// is exactly 1 up to rounding.
std::vector<double> butterworth_lowpass(std::span<const double> signal, double cutoff_hz,
                                        int order, double fs_hz);

/// All nine channel vectors derived from a raw recording: the six sampled
/// signals plus magnitude (Euclidean norm of the gyro triple by default),
/// pitch = atan2(-ax, sqrt(ay^2+az^2)) and roll = atan2(ay, az), radians.
std::array<std::vector<double>, kChannelCount>
derive_channels(const RawRecording& raw, MagnitudeSource mag_source = MagnitudeSource::gyro);

/// Maps the signal onto [0,1] by (x - min) / (max - min). A constant
/// input maps to all zeros. Optionally reports the bounds used.
std::vector<double> minmax_normalize(std::span<const double> signal,
                                     ChannelBounds* out_bounds = nullptr);

/// derive -> 4th-order zero-phase Butterworth -> min-max normalize, with
/// provenance recorded on the result.
ProcessedRecording preprocess(const RawRecording& raw, double cutoff_hz = 5.0,
                              MagnitudeSource mag_source = MagnitudeSource::gyro);

} // namespace rehabkit
