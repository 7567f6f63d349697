#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "rehabkit/evaluation.hpp"
#include "rehabkit/learners.hpp"
#include "rehabkit/recording.hpp"
#include "rehabkit/segmentation.hpp"

namespace rehabkit::io {

inline constexpr const char* kModelMagic = "REHABKIT-MODEL v1";

/// Sidecar metadata document next to a recording CSV: same basename with
/// a .meta.json suffix.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// CSV body ("t,ax,ay,az,gx,gy,gz") plus the JSON sidecar. Numbers are
/// written in shortest round-trip form, so save/load is value-exact.
void save_recording(const RawRecording& rec, const std::filesystem::path& csv_path);
RawRecording load_recording(const std::filesystem::path& csv_path);

/// Normalized nine-channel matrix with a provenance sidecar (inspection
/// output of the preprocess command).
void save_processed(const ProcessedRecording& rec, const std::filesystem::path& csv_path);

/// Feature matrix CSV: schema columns, then subject_id, exercise, label.
void save_feature_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_feature_csv(const std::filesystem::path& path,
                         const FeatureSchema& schema = FeatureSchema::standard());

/// Versioned structured-text model files. Round-trips preserve
/// predictions exactly; loading rejects unknown versions and truncated
/// files.
void save_model(const Model& model, const std::filesystem::path& path);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);

std::string segmentation_to_json(const SegmentationResult& result);
std::string cv_report_to_json(const CVReport& report);

struct RepetitionVerdict {
    int start = 0;
    int end = 0;
    Label label = Label::correct;
    double score = 0.0;
};

struct PipelineResult {
    std::vector<RepetitionVerdict> verdicts;
    int correct_count = 0;
    int deviant_count = 0;
    std::string warning;
};

struct PipelineOptions {
    double cutoff_hz = 5.0;
    MagnitudeSource mag_source = MagnitudeSource::gyro;
    SegmentationConfig segmentation;
    std::uint64_t seed = 0;
};

/// Offline run of the full workflow: load, preprocess, segment, extract
/// features, classify. Errors carry the failing stage name in their
/// message.
PipelineResult run_pipeline(const std::filesystem::path& recording_path,
                            const std::filesystem::path& segmenter_model_path,
                            const std::filesystem::path& classifier_model_path,
                            const PipelineOptions& options);

std::string pipeline_to_json(const PipelineResult& result);

/// Static plot of the detection channel with vertical cut-point markers.
std::string svg_plot(std::span<const double> signal, std::span<const int> cut_points);

/// Per-repetition feature dataset for a recording given its boundaries;
/// labels are attached when the recording carries matching rep_labels.
Dataset features_for_recording(const ProcessedRecording& processed,
                               std::span<const std::pair<int, int>> repetitions,
                               std::span<const Label> labels);

} // namespace rehabkit::io
