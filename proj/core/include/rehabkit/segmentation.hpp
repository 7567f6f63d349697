#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rehabkit/learners/hoeffding.hpp"
#include "rehabkit/recording.hpp"

namespace rehabkit {

/// Thresholds and bounds of the template-matching segmenter. Detection
/// and chunk featurization channels are configurable separately since the
/// source text does not name which of the nine vectors drives either.
struct SegmentationConfig {
    Channel channel = Channel::MAG;         // zero-velocity detection
    Channel feature_channel = Channel::MAG; // chunk featurization
    double zero_vel_threshold = 0.05;       // normalized units
    int dwell_samples = 26;                 // ~0.25 s at 102.4 Hz
    double variance_threshold = 1e-4;
    int k_min = 2;
    int k_max = 40;
    std::optional<int> expected_reps;
    int min_chunk_samples = 51;   // 0.5 s
    int max_chunk_samples = 1536; // 15 s

    void validate() const;
};

/// Candidate pairs may skip this many intermediate centroids, since long
/// or irregular pauses can produce more than one centroid each.
inline constexpr int kMaxCandidateSkip = 2;

struct CandidateSet {
    std::vector<int> zero_velocity_indices;
    std::vector<double> centroids; // sorted, sample-index scale
};

/// The 25 chunk descriptors: length, height, std, skewness, kurtosis and
/// 20 spectral magnitudes.
struct ChunkFeatures {
    static constexpr int kCount = 5 + kSpectralCoeffCount;
    std::array<double, kCount> values{};
};

struct Chunk {
    int start = 0;
    int end = 0;
    ChunkFeatures features;
    std::optional<bool> is_repetition;
    double confidence = 0.0;
};

struct SegmentationResult {
    std::vector<int> cut_points;
    std::vector<std::pair<int, int>> repetitions;
    int rejected_chunks = 0;
    std::string warning; // empty = none
};

/// Indices whose surrounding dwell window stays inside the zero-velocity
/// band around the (normalized) baseline with variance below threshold.
std::vector<int> detect_zero_velocity(std::span<const double> signal,
                                      const SegmentationConfig& config, double baseline_norm);

/// 1-D k-means over the zero-velocity indices. k = expected_reps + 1
/// when configured, otherwise chosen by the elbow criterion over
/// [k_min, k_max].
CandidateSet cluster_candidates(const std::vector<int>& indices, const SegmentationConfig& config,
                                std::uint64_t seed);

ChunkFeatures chunk_feature_vector(std::span<const double> slice);

/// A labeled chunk sample used to train the chunk classifier.
struct ChunkTemplate {
    ChunkFeatures features;
    bool is_repetition = false;
};

/// Hoeffding parameters used for the chunk classifier. Chunk descriptors
/// are strongly correlated, which ties the best-vs-runner-up gain race;
/// a larger tie threshold and a shorter grace period let compact template
/// sets grow a working tree (the learner-module defaults target long
/// streams).
inline HoeffdingParams chunk_classifier_params() {
    HoeffdingParams params;
    params.tau = 0.3;
    params.grace_period = 100;
    return params;
}

/// Hoeffding chunk classifier fit in a single pass over the templates.
std::unique_ptr<HoeffdingTree>
train_chunk_classifier(std::span<const ChunkTemplate> templates,
                       const HoeffdingParams& params = chunk_classifier_params());

/// Synthetic template dataset: candidate chunks enumerated exactly as the
/// segmenter does on ideal generated sessions (correct and deviant
/// repetitions under several noise and pause regimes), labeled from the
/// generator's ground truth.
std::vector<ChunkTemplate> build_template_chunks(std::uint64_t seed);

/// Rest level used to anchor zero-velocity detection: the device
/// baseline's normalized image, floored by the channel's 10th percentile
/// (rectified noise lifts the magnitude channel's rest level above the
/// baseline image).
double detection_anchor(const ProcessedRecording& processed, Channel channel);

/// Full segmenter: detect -> cluster -> enumerate candidate pairs ->
/// classify -> pick a non-overlapping subset by confidence-weighted
/// interval scheduling. Returned boundaries are tightened to the active
/// region inside each selected chunk.
SegmentationResult select_cut_points(const ProcessedRecording& processed,
                                     const HoeffdingTree& model, const SegmentationConfig& config,
                                     std::uint64_t seed);

/// Count-based segmentation accuracy:
/// sum_i(reps_i - |reps_i - segm_i|) / sum_i reps_i, taken literally (a
/// heavily over-segmented case may contribute negatively).
double segmentation_accuracy(std::span<const std::pair<int, int>> cases);

/// Serialized chunk-classifier schema tag (see FeatureSchema::chunk_schema).
Dataset chunk_templates_to_dataset(std::span<const ChunkTemplate> templates);

} // namespace rehabkit
