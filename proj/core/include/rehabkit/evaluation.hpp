#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rehabkit/learners.hpp"

namespace rehabkit {

/// Subject-level fold assignment: a subject's rows are never split
/// between train and test.
struct FoldPlan {
    int k = 5;
    std::map<std::string, int> assignments;
};

/// Confusion counts with deviant as the positive class.
struct Metrics {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    long total() const { return tp + fp + tn + fn; }
    double accuracy() const { return total() ? static_cast<double>(tp + tn) / total() : 0.0; }
    double precision() const { return tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0; }
    double recall() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }

    Metrics& operator+=(const Metrics& o) {
        tp += o.tp; fp += o.fp; tn += o.tn; fn += o.fn;
        return *this;
    }
};

struct CVReport {
    struct Fold {
        int index = 0;
        Metrics metrics;
        bool skipped = false;
        std::string warning;
    };
    Algorithm algorithm = Algorithm::random_forest;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
    Metrics pooled; // summed confusion counts across folds
    std::size_t rows = 0;
    std::size_t subjects = 0;
    std::uint64_t schema_hash = 0;
};

/// Shuffles the subjects by seed, then assigns each greedily to the fold
/// with the fewest instances. Throws when there are fewer subjects than
/// folds.
FoldPlan make_subject_folds(const Dataset& dataset, int k, std::uint64_t seed);

Metrics confusion_metrics(std::span<const std::pair<Label, Label>> predicted_actual);

/// Trains on the rows outside each fold and evaluates on the rows inside
/// it; only rows flagged correctly segmented participate. A fold whose
/// training split is single-class is skipped with a warning.
CVReport cross_validate(const Dataset& dataset, const TrainConfig& config, const FoldPlan& plan);

} // namespace rehabkit
