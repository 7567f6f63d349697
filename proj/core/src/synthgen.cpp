#include "rehabkit/synthgen.hpp"

#include <cmath>
#include <stdexcept>

#include "rehabkit/rng.hpp"

namespace rehabkit {

namespace {
constexpr double kPi = 3.14159265358979323846;

int ax_i(Channel c) { return index_of(c); }
} // namespace

void ExerciseTemplate::validate() const {
    bool any = false;
    for (const double a : amplitudes)
        if (a != 0.0) {
            if (a < 0.0) throw std::invalid_argument("template amplitudes must be non-negative");
            any = true;
        }
    if (!any) throw std::invalid_argument("template has no active channel");
    if (rep_duration_s < 1.0 || rep_duration_s > 10.0)
        throw std::invalid_argument("rep duration must lie in [1, 10] s");
    if (deviation_channel < 0 || deviation_channel >= kSampledChannelCount)
        throw std::invalid_argument("bad deviation channel");
}

ExerciseTemplate standard_template(Exercise e) {
    // The four archetypes differ parametrically: dominant gyro axis,
    // supporting accelerometer axis, and movement tempo.
    ExerciseTemplate t;
    t.exercise = e;
    switch (e) {
    case Exercise::HS: // heel slide: shank pitches while sliding
        t.amplitudes[ax_i(Channel::GX)] = 1.0;
        t.amplitudes[ax_i(Channel::AX)] = 0.6;
        t.amplitudes[ax_i(Channel::GY)] = 0.25;
        t.rep_duration_s = 3.0;
        t.deviation_channel = ax_i(Channel::GZ); // external-rotation analogue
        break;
    case Exercise::SKE: // seated knee extension
        t.amplitudes[ax_i(Channel::GY)] = 1.0;
        t.amplitudes[ax_i(Channel::AZ)] = 0.5;
        t.amplitudes[ax_i(Channel::GX)] = 0.2;
        t.rep_duration_s = 2.5;
        t.deviation_channel = ax_i(Channel::GZ);
        break;
    case Exercise::IRQ: // inner range quadriceps: narrow movement
        t.amplitudes[ax_i(Channel::GX)] = 0.7;
        t.amplitudes[ax_i(Channel::AY)] = 0.35;
        t.rep_duration_s = 2.0;
        t.deviation_channel = ax_i(Channel::AX);
        break;
    case Exercise::SLR: // straight leg raise
        t.amplitudes[ax_i(Channel::GY)] = 0.9;
        t.amplitudes[ax_i(Channel::AX)] = 0.55;
        t.amplitudes[ax_i(Channel::GZ)] = 0.2;
        t.rep_duration_s = 3.5;
        t.deviation_channel = ax_i(Channel::AY);
        break;
    }
    return t;
}

void SessionSpec::validate() const {
    exercise_template.validate();
    if (label_pattern.empty()) throw std::invalid_argument("label pattern must be non-empty");
    if (pause_range.first < 0.0 || pause_range.second < pause_range.first)
        throw std::invalid_argument("bad pause range");
    if (hold_range.first < 0.0 || hold_range.second < hold_range.first)
        throw std::invalid_argument("bad hold range");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
    if (rep_amplitude_scale && rep_amplitude_scale->size() != label_pattern.size())
        throw std::invalid_argument("rep_amplitude_scale length mismatch");
    device.validate();
}

std::array<std::vector<double>, kSampledChannelCount>
synth_repetition(const ExerciseTemplate& tmpl, Label label, double hold_s, double fs_hz,
                 double amplitude_scale) {
    tmpl.validate();
    // Odd sample count so the lobe peak lands exactly on a sample.
    int n = static_cast<int>(std::llround(tmpl.rep_duration_s * fs_hz));
    if (n < 3) n = 3;
    if (n % 2 == 0) ++n;
    const int hold_n = static_cast<int>(std::llround(hold_s * fs_hz));
    const int half = n / 2;

    std::array<double, kSampledChannelCount> amps = tmpl.amplitudes;
    std::array<double, kSampledChannelCount> extra{};
    if (label == Label::deviant) {
        for (double& a : amps) a *= tmpl.deviation_amplitude_scale;
        extra[static_cast<std::size_t>(tmpl.deviation_channel)] = tmpl.deviation_amplitude;
    }

    std::array<std::vector<double>, kSampledChannelCount> out;
    const int total = n + hold_n;
    for (int ch = 0; ch < kSampledChannelCount; ++ch) {
        const double amp = (amps[static_cast<std::size_t>(ch)] +
                            extra[static_cast<std::size_t>(ch)]) * amplitude_scale;
        auto& v = out[static_cast<std::size_t>(ch)];
        v.resize(static_cast<std::size_t>(total), 0.0);
        if (amp == 0.0) continue;
        for (int i = 0; i < total; ++i) {
            // plateau of hold_n samples inserted at the lobe peak
            int phase_idx = i;
            if (i > half && i < half + hold_n) {
                v[static_cast<std::size_t>(i)] = amp;
                continue;
            }
            if (i >= half + hold_n) phase_idx = i - hold_n;
            const double phase = 2.0 * kPi * phase_idx / (n - 1);
            v[static_cast<std::size_t>(i)] = amp * (1.0 - std::cos(phase)) / 2.0;
        }
    }
    return out;
}

std::pair<RawRecording, GroundTruth> synth_session(const SessionSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const double fs = spec.device.sampling_rate_hz;

    RawRecording rec;
    rec.subject_id = spec.subject_id;
    rec.exercise = spec.exercise_template.exercise;
    rec.device = spec.device;
    GroundTruth gt;

    std::array<std::vector<double>, kSampledChannelCount> signal;

    auto append_pause = [&](double seconds) {
        const int n = std::max(1, static_cast<int>(std::llround(seconds * fs)));
        for (auto& v : signal) v.insert(v.end(), static_cast<std::size_t>(n), 0.0);
    };

    const int reps = spec.rep_count();
    for (int r = 0; r < reps; ++r) {
        append_pause(rng.uniform(spec.pause_range.first, spec.pause_range.second));
        const double hold = rng.uniform(spec.hold_range.first, spec.hold_range.second);
        const double scale =
            spec.rep_amplitude_scale ? (*spec.rep_amplitude_scale)[static_cast<std::size_t>(r)]
                                     : 1.0;
        const Label label = spec.label_pattern[static_cast<std::size_t>(r)];
        const auto rep = synth_repetition(spec.exercise_template, label, hold, fs, scale);

        const int start = static_cast<int>(signal[0].size());
        for (int ch = 0; ch < kSampledChannelCount; ++ch)
            signal[static_cast<std::size_t>(ch)].insert(signal[static_cast<std::size_t>(ch)].end(),
                                                        rep[static_cast<std::size_t>(ch)].begin(),
                                                        rep[static_cast<std::size_t>(ch)].end());
        gt.boundaries.emplace_back(start, static_cast<int>(signal[0].size()));
        gt.labels.push_back(label);
    }
    append_pause(rng.uniform(spec.pause_range.first, spec.pause_range.second));

    const std::size_t n = signal[0].size();
    rec.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        RawSample& s = rec.samples[i];
        s.t = static_cast<double>(i) / fs;
        double vib = 0.0;
        if (spec.vibration)
            vib = spec.vibration->second *
                  std::sin(2.0 * kPi * spec.vibration->first * static_cast<double>(i) / fs);
        double* fields[kSampledChannelCount] = {&s.ax, &s.ay, &s.az, &s.gx, &s.gy, &s.gz};
        for (int ch = 0; ch < kSampledChannelCount; ++ch) {
            double v = spec.device.baselines[static_cast<std::size_t>(ch)] +
                       signal[static_cast<std::size_t>(ch)][i] + vib;
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.next_gaussian();
            *fields[ch] = v;
        }
    }

    rec.rep_labels = gt.labels;
    rec.ground_truth_bounds = gt.boundaries;
    return {std::move(rec), std::move(gt)};
}

SessionSpec make_session_spec(Exercise e, int reps, int deviant_every, std::uint64_t seed) {
    SessionSpec spec;
    spec.exercise_template = standard_template(e);
    spec.seed = seed;
    spec.label_pattern.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r)
        spec.label_pattern.push_back(deviant_every > 0 && (r + 1) % deviant_every == 0
                                         ? Label::deviant
                                         : Label::correct);
    return spec;
}

} // namespace rehabkit
