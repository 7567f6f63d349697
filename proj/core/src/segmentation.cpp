#include "rehabkit/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rehabkit/dsp.hpp"
#include "rehabkit/features.hpp"
#include "rehabkit/kmeans.hpp"
#include "rehabkit/rng.hpp"
#include "rehabkit/signal_ops.hpp"
#include "rehabkit/synthgen.hpp"

namespace rehabkit {

void SegmentationConfig::validate() const {
    if (!(zero_vel_threshold > 0.0)) throw std::invalid_argument("zero_vel_threshold must be positive");
    if (dwell_samples < 2) throw std::invalid_argument("dwell_samples must be at least 2");
    if (!(variance_threshold > 0.0)) throw std::invalid_argument("variance_threshold must be positive");
    if (k_min < 1 || k_max < k_min) throw std::invalid_argument("empty k range");
    if (min_chunk_samples < 1 || max_chunk_samples <= min_chunk_samples)
        throw std::invalid_argument("bad chunk sample bounds");
    if (expected_reps && *expected_reps < 1)
        throw std::invalid_argument("expected_reps must be positive");
}

std::vector<int> detect_zero_velocity(std::span<const double> signal,
                                      const SegmentationConfig& config, double baseline_norm) {
    config.validate();
    const int n = static_cast<int>(signal.size());
    const int d = config.dwell_samples;
    if (n < d) throw std::invalid_argument("signal shorter than dwell window");

    // Window of exactly d samples centered at i: [i - d/2, i + d/2).
    const int lead = d / 2;

    // Prefix sums for O(1) window variance.
    std::vector<double> ps(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> ps2(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> in_band(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        ps[static_cast<std::size_t>(i) + 1] = ps[static_cast<std::size_t>(i)] + signal[static_cast<std::size_t>(i)];
        ps2[static_cast<std::size_t>(i) + 1] =
            ps2[static_cast<std::size_t>(i)] + signal[static_cast<std::size_t>(i)] * signal[static_cast<std::size_t>(i)];
        in_band[static_cast<std::size_t>(i) + 1] =
            in_band[static_cast<std::size_t>(i)] +
            (std::abs(signal[static_cast<std::size_t>(i)] - baseline_norm) < config.zero_vel_threshold ? 1 : 0);
    }

    std::vector<int> out;
    for (int i = lead; i + (d - lead) <= n; ++i) {
        const int lo = i - lead, hi = i + (d - lead); // [lo, hi)
        if (in_band[static_cast<std::size_t>(hi)] - in_band[static_cast<std::size_t>(lo)] != d)
            continue;
        const double sum = ps[static_cast<std::size_t>(hi)] - ps[static_cast<std::size_t>(lo)];
        const double sum2 = ps2[static_cast<std::size_t>(hi)] - ps2[static_cast<std::size_t>(lo)];
        const double mean = sum / d;
        const double var = std::max(sum2 / d - mean * mean, 0.0);
        if (var < config.variance_threshold) out.push_back(i);
    }
    return out;
}

CandidateSet cluster_candidates(const std::vector<int>& indices, const SegmentationConfig& config,
                                std::uint64_t seed) {
    config.validate();
    if (indices.size() < 2) throw std::invalid_argument("insufficient candidates");

    std::vector<double> values(indices.begin(), indices.end());
    std::sort(values.begin(), values.end());

    CandidateSet set;
    set.zero_velocity_indices = indices;
    std::sort(set.zero_velocity_indices.begin(), set.zero_velocity_indices.end());

    if (config.expected_reps) {
        const int k = *config.expected_reps + 1;
        if (static_cast<std::size_t>(k) > values.size())
            throw std::invalid_argument("insufficient candidates");
        Rng rng(seed);
        set.centroids = kmeans_1d(values, k, rng).centroids;
        return set;
    }

    // Zero-velocity indices are dense inside each pause, so maximal runs
    // separated by more than a dwell window count the pauses directly,
    // and the per-run means are already the k-means fixed point for that
    // k. The plain WCSS optimum is not wanted here: with unequal pause
    // durations it saves objective by splitting wide pauses and merging
    // narrow ones across a repetition. (A WCSS elbow has no knee in that
    // regime either; see select_k_elbow for the classical criterion.)
    std::vector<double> run_means;
    std::size_t run_start = 0;
    double run_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        run_sum += values[i];
        const bool last = i + 1 == values.size();
        if (last || values[i + 1] - values[i] > config.dwell_samples) {
            run_means.push_back(run_sum / static_cast<double>(i + 1 - run_start));
            run_start = i + 1;
            run_sum = 0.0;
        }
    }
    const int runs = static_cast<int>(run_means.size());
    const int k = std::clamp(runs, config.k_min,
                             std::min<int>(config.k_max, static_cast<int>(values.size())));
    if (k == runs) {
        set.centroids = std::move(run_means);
    } else {
        Rng rng(seed);
        set.centroids = kmeans_1d(values, k, rng).centroids;
    }
    return set;
}

ChunkFeatures chunk_feature_vector(std::span<const double> slice) {
    if (slice.empty()) throw std::invalid_argument("chunk_feature_vector: empty slice");

    ChunkFeatures f;
    const double n = static_cast<double>(slice.size());
    const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
    if (*lo == *hi) {
        // constant slice: everything but the length is 0 by decision
        f.values[0] = n;
        return f;
    }
    double mean = 0.0;
    for (const double v : slice) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double v : slice) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n; m3 /= n; m4 /= n;

    f.values[0] = n;
    f.values[1] = *hi - *lo;
    f.values[2] = std::sqrt(m2);
    f.values[3] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    f.values[4] = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    const std::vector<double> spec = spectral_magnitudes(slice, kSpectralCoeffCount);
    std::copy(spec.begin(), spec.end(), f.values.begin() + 5);
    return f;
}

Dataset chunk_templates_to_dataset(std::span<const ChunkTemplate> templates) {
    Dataset ds;
    ds.schema = FeatureSchema::chunk_schema();
    ds.rows.reserve(templates.size());
    for (const ChunkTemplate& t : templates) {
        FeatureVector fv;
        fv.values.assign(t.features.values.begin(), t.features.values.end());
        fv.label = t.is_repetition ? Label::deviant : Label::correct;
        ds.rows.push_back(std::move(fv));
    }
    return ds;
}

std::unique_ptr<HoeffdingTree> train_chunk_classifier(std::span<const ChunkTemplate> templates,
                                                      const HoeffdingParams& params) {
    const Dataset ds = chunk_templates_to_dataset(templates);
    return HoeffdingTree::fit(ds, params, 0);
}

namespace {

// All candidate pairs within the span bounds, skipping at most
// kMaxCandidateSkip intermediate centroids.
template <typename Fn>
void for_each_candidate_pair(const std::vector<int>& points, const SegmentationConfig& config,
                             Fn&& fn) {
    const int m = static_cast<int>(points.size());
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j <= std::min(m - 1, i + 1 + kMaxCandidateSkip); ++j) {
            const int span = points[static_cast<std::size_t>(j)] - points[static_cast<std::size_t>(i)];
            if (span < config.min_chunk_samples) continue;
            if (span > config.max_chunk_samples) break; // spans only grow with j
            fn(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
        }
    }
}

struct EnumeratedChunk {
    int start = 0;
    int end = 0;
    double confidence = 0.0;
};

// Non-overlapping subset of positive chunks maximizing total confidence
// (weighted interval scheduling). Shared endpoints do not overlap. Ties
// prefer more chunks, then earlier starts.
std::vector<EnumeratedChunk> schedule_chunks(std::vector<EnumeratedChunk> chunks) {
    if (chunks.empty()) return chunks;
    std::sort(chunks.begin(), chunks.end(), [](const auto& a, const auto& b) {
        return a.end != b.end ? a.end < b.end : a.start < b.start;
    });
    const int m = static_cast<int>(chunks.size());

    struct Value {
        double conf = 0.0;
        int count = 0;
        double start_sum = 0.0;
        bool better_than(const Value& o) const {
            if (conf > o.conf + 1e-12) return true;
            if (conf < o.conf - 1e-12) return false;
            if (count != o.count) return count > o.count;
            return start_sum < o.start_sum;
        }
    };

    // p[i]: last chunk (1-based) ending at or before chunks[i].start
    std::vector<int> p(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i) {
        int lo = 0, hi = i; // search over 1..i
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (chunks[static_cast<std::size_t>(mid) - 1].end <= chunks[static_cast<std::size_t>(i)].start) lo = mid;
            else hi = mid - 1;
        }
        p[static_cast<std::size_t>(i)] = lo;
    }

    std::vector<Value> best(static_cast<std::size_t>(m) + 1);
    std::vector<bool> took(static_cast<std::size_t>(m) + 1, false);
    for (int i = 1; i <= m; ++i) {
        const EnumeratedChunk& ck = chunks[static_cast<std::size_t>(i) - 1];
        Value take = best[static_cast<std::size_t>(p[static_cast<std::size_t>(i) - 1])];
        take.conf += ck.confidence;
        take.count += 1;
        take.start_sum += ck.start;
        const Value& skip = best[static_cast<std::size_t>(i) - 1];
        if (take.better_than(skip)) {
            best[static_cast<std::size_t>(i)] = take;
            took[static_cast<std::size_t>(i)] = true;
        } else {
            best[static_cast<std::size_t>(i)] = skip;
        }
    }

    std::vector<EnumeratedChunk> chosen;
    for (int i = m; i > 0;) {
        if (took[static_cast<std::size_t>(i)]) {
            chosen.push_back(chunks[static_cast<std::size_t>(i) - 1]);
            i = p[static_cast<std::size_t>(i) - 1];
        } else {
            --i;
        }
    }
    std::reverse(chosen.begin(), chosen.end());
    return chosen;
}

// Tightens a selected chunk to its active region: first/last sample
// outside the zero-velocity band, widened by half a dwell window. Keeps
// the original bounds when the chunk has no active sample.
std::pair<int, int> refine_bounds(std::span<const double> signal, int start, int end,
                                  double baseline_norm, const SegmentationConfig& config) {
    int first = -1, last = -1;
    for (int i = start; i < end; ++i) {
        if (std::abs(signal[static_cast<std::size_t>(i)] - baseline_norm) >=
            config.zero_vel_threshold) {
            if (first < 0) first = i;
            last = i;
        }
    }
    if (first < 0) return {start, end};
    const int margin = config.dwell_samples / 2;
    return {std::max(start, first - margin), std::min(end, last + 1 + margin)};
}

} // namespace

double detection_anchor(const ProcessedRecording& processed, Channel channel) {
    // The device-baseline image marks gravity-only rest, but rectified
    // noise biases the rest level of the magnitude channel upward; the
    // low quantile of the signal tracks that floor. Pauses dominate the
    // low end of an exercise recording, so the 10th percentile is rest.
    const double image = normalized_baseline(processed, channel);
    const double floor = quantile_linear(processed.channel(channel), 0.1);
    return std::max(image, floor);
}

SegmentationResult select_cut_points(const ProcessedRecording& processed,
                                     const HoeffdingTree& model, const SegmentationConfig& config,
                                     std::uint64_t seed) {
    config.validate();
    const std::vector<double>& detect = processed.channel(config.channel);
    const std::vector<double>& featurize = processed.channel(config.feature_channel);
    const double baseline = detection_anchor(processed, config.channel);

    SegmentationResult result;
    const std::vector<int> zv = detect_zero_velocity(detect, config, baseline);
    if (zv.size() < 2) {
        result.warning = "no candidates";
        return result;
    }

    SegmentationConfig effective = config;
    if (effective.expected_reps)
        effective.expected_reps =
            std::min(*effective.expected_reps, static_cast<int>(zv.size()) - 1);
    const CandidateSet cand = cluster_candidates(zv, effective, seed);

    std::vector<int> points;
    points.reserve(cand.centroids.size());
    for (const double c : cand.centroids) points.push_back(static_cast<int>(std::lround(c)));

    std::vector<EnumeratedChunk> positive;
    int enumerated = 0;
    for_each_candidate_pair(points, config, [&](int start, int end) {
        ++enumerated;
        const ChunkFeatures f = chunk_feature_vector(std::span<const double>(featurize).subspan(
            static_cast<std::size_t>(start), static_cast<std::size_t>(end - start)));
        const Prediction pred = model.predict(f.values);
        if (pred.label == 1) positive.push_back({start, end, pred.score});
    });
    result.rejected_chunks = enumerated - static_cast<int>(positive.size());
    if (positive.empty()) {
        if (enumerated == 0) result.warning = "no candidates";
        return result;
    }

    const std::vector<EnumeratedChunk> chosen = schedule_chunks(std::move(positive));
    for (const EnumeratedChunk& ck : chosen)
        result.repetitions.push_back(refine_bounds(detect, ck.start, ck.end, baseline, config));

    for (const auto& [s, e] : result.repetitions) {
        result.cut_points.push_back(s);
        result.cut_points.push_back(e);
    }
    std::sort(result.cut_points.begin(), result.cut_points.end());
    result.cut_points.erase(std::unique(result.cut_points.begin(), result.cut_points.end()),
                            result.cut_points.end());
    return result;
}

double segmentation_accuracy(std::span<const std::pair<int, int>> cases) {
    if (cases.empty()) throw std::invalid_argument("segmentation_accuracy: empty input");
    long long reps_total = 0, recovered = 0;
    for (const auto& [reps, segm] : cases) {
        if (reps <= 0) throw std::invalid_argument("segmentation_accuracy: reps must be positive");
        if (segm < 0) throw std::invalid_argument("segmentation_accuracy: segm must be non-negative");
        reps_total += reps;
        recovered += reps - std::abs(reps - segm);
    }
    return static_cast<double>(recovered) / static_cast<double>(reps_total);
}

std::vector<ChunkTemplate> build_template_chunks(std::uint64_t seed) {
    std::vector<ChunkTemplate> templates;
    SegmentationConfig config; // defaults; detection on MAG

    auto harvest_session = [&](const SessionSpec& spec, std::uint64_t cluster_seed) {
        const auto [raw, gt] = synth_session(spec);
        const ProcessedRecording processed = preprocess(raw);
        const std::vector<double>& detect = processed.channel(config.channel);
        const double baseline = detection_anchor(processed, config.channel);
        const std::vector<int> zv = detect_zero_velocity(detect, config, baseline);
        if (zv.size() < 2) return;
        const CandidateSet cand = cluster_candidates(zv, config, cluster_seed);

        std::vector<int> points;
        points.reserve(cand.centroids.size());
        for (const double c : cand.centroids) points.push_back(static_cast<int>(std::lround(c)));

        // Enumerate exactly like the segmenter and label each chunk from
        // ground truth: positive iff it covers one whole repetition and
        // no part of any other.
        for_each_candidate_pair(points, config, [&](int start, int end) {
            int covered = 0, touched = 0;
            for (const auto& [bs, be] : gt.boundaries) {
                if (bs >= start && be <= end) ++covered;
                else if (be > start && bs < end) ++touched;
            }
            ChunkTemplate t;
            t.features = chunk_feature_vector(std::span<const double>(detect).subspan(
                static_cast<std::size_t>(start), static_cast<std::size_t>(end - start)));
            t.is_repetition = covered == 1 && touched == 0;
            templates.push_back(std::move(t));
        });
    };

    const double noise_levels[] = {0.003, 0.006, 0.01, 0.015, 0.02, 0.03};
    constexpr int kSessionsPerSetting = 3;
    std::uint64_t session_idx = 0;
    for (const Exercise exercise : kAllExercises) {
        for (const double noise : noise_levels) {
            for (const bool fatigue : {false, true}) {
                for (int i = 0; i < kSessionsPerSetting; ++i) {
                    SessionSpec spec =
                        make_session_spec(exercise, 10, 2, derive_seed(seed, session_idx));
                    spec.noise_sigma = noise;
                    if (fatigue) spec.with_fatigue();
                    harvest_session(spec, derive_seed(seed, session_idx + 0x10000));
                    ++session_idx;
                }
            }
        }
    }
    // Deterministic interleave so a single streaming pass sees both
    // classes throughout.
    Rng shuffler(derive_seed(seed, 0x7365737373696f6eULL));
    shuffler.shuffle(templates);
    return templates;
}

} // namespace rehabkit
