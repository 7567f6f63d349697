#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rehabkit/types.hpp"

namespace rehabkit {

inline constexpr int kStaticFeatureCount = 14;
inline constexpr int kDynamicFeatureCount = 25;
inline constexpr int kSpectralCoeffCount = 20;
inline constexpr int kFeaturesPerChannel = kStaticFeatureCount + kDynamicFeatureCount;
/// 9 channels x 39 features + the pitch/roll correlation appended once
/// for pitch and once for roll.
inline constexpr int kRepetitionFeatureCount = kChannelCount * kFeaturesPerChannel + 2;

/// Ordered (channel, feature-name) schema for repetition vectors. The
/// ordering is fixed; the version tag changes whenever a feature
/// definition changes so stored models detect definition drift.
class FeatureSchema {
public:
    struct Entry {
        std::string column;  // e.g. "mag_energy"
    };

    static FeatureSchema standard();       // 353-entry repetition schema
    static FeatureSchema chunk_schema();   // 25-entry segmentation chunk schema
    /// Ad-hoc schema (auxiliary datasets, tests).
    static FeatureSchema custom(std::string version, const std::vector<std::string>& columns);

    const std::string& version() const { return version_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::uint64_t hash() const { return hash_; }

private:
    FeatureSchema(std::string version, std::vector<Entry> entries);
    std::string version_;
    std::vector<Entry> entries_;
    std::uint64_t hash_ = 0;
};

/// FNV-1a 64-bit, used for schema fingerprints.
std::uint64_t fnv1a64(std::string_view data);

/// One repetition's numeric features plus bookkeeping for training.
struct FeatureVector {
    std::vector<double> values;
    std::optional<Label> label;
    std::string subject_id;
    Exercise exercise = Exercise::HS;
    bool correctly_segmented = true;
};

/// mean, median, std, variance, range, kurtosis, skewness, max, min,
/// positive mean, negative mean, sum of absolute successive differences,
/// 1st and 3rd quartile — in that order. Moments are population moments;
/// skewness and kurtosis (non-excess) are 0 for constant input; positive
/// and negative means are taken over the mean-centered signal; quartiles
/// use linear interpolation between order statistics.
std::array<double, kStaticFeatureCount> static_features(std::span<const double> signal);

/// energy, energy ratio, energy average, harmonic ratio, energy entropy,
/// then 20 spectral magnitudes of the 256-point resampled transform.
std::array<double, kDynamicFeatureCount> dynamic_features(std::span<const double> signal);

/// Pearson correlation; 0 when either input is constant.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Quantile with linear interpolation between order statistics, q in [0,1].
double quantile_linear(std::span<const double> signal, double q);

/// Full 353-value feature vector for one repetition given its nine
/// equal-length channel slices (indexed by Channel).
FeatureVector repetition_feature_vector(
    const std::array<std::span<const double>, kChannelCount>& slices);

} // namespace rehabkit
