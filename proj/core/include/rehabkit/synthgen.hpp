#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rehabkit/recording.hpp"

namespace rehabkit {

/// Parametric movement archetype for one exercise: raised-cosine lobes on
/// the active channels, in normalized channel units on top of the device
/// baselines. The deviation model attenuates the primary movement and
/// leaks a secondary lobe onto another axis.
struct ExerciseTemplate {
    Exercise exercise = Exercise::HS;
    /// Lobe amplitude per channel (ax..gz); 0 = inactive.
    std::array<double, kSampledChannelCount> amplitudes{};
    double rep_duration_s = 3.0;
    double deviation_amplitude_scale = 0.55;
    /// Extra lobe on this channel for deviant repetitions.
    int deviation_channel = 0;
    double deviation_amplitude = 0.35;

    void validate() const;
};

/// Built-in archetype for each of the four exercises.
ExerciseTemplate standard_template(Exercise e);

struct SessionSpec {
    ExerciseTemplate exercise_template;
    std::vector<Label> label_pattern;                   // one entry per repetition
    std::pair<double, double> pause_range = {1.0, 2.0}; // seconds
    std::pair<double, double> hold_range = {0.0, 0.0};  // isometric-peak plateau
    double noise_sigma = 0.01;
    std::optional<std::pair<double, double>> vibration; // (frequency hz, amplitude)
    std::uint64_t seed = 0;
    std::string subject_id = "synthetic";
    DeviceConfig device;
    /// Optional per-repetition amplitude factor (degraded executions).
    std::optional<std::vector<double>> rep_amplitude_scale;

    int rep_count() const { return static_cast<int>(label_pattern.size()); }
    void validate() const;

    /// Fatigue protocol: wide pause spread and isometric holds.
    SessionSpec& with_fatigue() {
        pause_range = {0.5, 5.0};
        hold_range = {1.0, 3.0};
        return *this;
    }
};

struct GroundTruth {
    std::vector<std::pair<int, int>> boundaries; // [start, end) sample indices
    std::vector<Label> labels;
};

/// One repetition's six sampled-channel slices (no baselines applied), as
/// raised-cosine lobes with an optional plateau of hold_s at the peak.
std::array<std::vector<double>, kSampledChannelCount>
synth_repetition(const ExerciseTemplate& tmpl, Label label, double hold_s, double fs_hz,
                 double amplitude_scale = 1.0);

/// Full session: pauses and repetitions per the label pattern, white
/// noise and optional vibration added, exact boundaries returned.
std::pair<RawRecording, GroundTruth> synth_session(const SessionSpec& spec);

/// Convenience: n-rep spec with labels alternating per `deviant_every`
/// (0 = all correct).
SessionSpec make_session_spec(Exercise e, int reps, int deviant_every, std::uint64_t seed);

} // namespace rehabkit
