#include "rehabkit/evaluation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "rehabkit/rng.hpp"

namespace rehabkit {

FoldPlan make_subject_folds(const Dataset& dataset, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("fold count must be at least 2");

    std::map<std::string, long> counts;
    for (const FeatureVector& fv : dataset.rows) counts[fv.subject_id] += 1;
    if (static_cast<int>(counts.size()) < k)
        throw std::invalid_argument("fewer subjects than folds");

    std::vector<std::string> subjects;
    subjects.reserve(counts.size());
    for (const auto& [id, c] : counts) subjects.push_back(id);
    Rng rng(seed);
    rng.shuffle(subjects);

    FoldPlan plan;
    plan.k = k;
    std::vector<long> fold_sizes(static_cast<std::size_t>(k), 0);
    for (const std::string& id : subjects) {
        int target = 0;
        for (int f = 1; f < k; ++f)
            if (fold_sizes[static_cast<std::size_t>(f)] < fold_sizes[static_cast<std::size_t>(target)])
                target = f;
        plan.assignments[id] = target;
        fold_sizes[static_cast<std::size_t>(target)] += counts[id];
    }
    return plan;
}

Metrics confusion_metrics(std::span<const std::pair<Label, Label>> predicted_actual) {
    if (predicted_actual.empty()) throw std::invalid_argument("confusion_metrics: empty input");
    Metrics m;
    for (const auto& [predicted, actual] : predicted_actual) {
        const bool pred_pos = predicted == Label::deviant;
        const bool act_pos = actual == Label::deviant;
        if (pred_pos && act_pos) ++m.tp;
        else if (pred_pos && !act_pos) ++m.fp;
        else if (!pred_pos && act_pos) ++m.fn;
        else ++m.tn;
    }
    return m;
}

CVReport cross_validate(const Dataset& dataset, const TrainConfig& config, const FoldPlan& plan) {
    for (const FeatureVector& fv : dataset.rows)
        if (fv.correctly_segmented && !plan.assignments.contains(fv.subject_id))
            throw std::invalid_argument("fold plan does not cover subject '" + fv.subject_id + "'");

    CVReport report;
    report.algorithm = config.algorithm;
    report.seed = config.seed;
    report.schema_hash = dataset.schema.hash();

    std::set<std::string> subject_set;
    std::vector<const FeatureVector*> rows;
    for (const FeatureVector& fv : dataset.rows) {
        if (!fv.correctly_segmented) continue; // mirror training on clean segments only
        rows.push_back(&fv);
        subject_set.insert(fv.subject_id);
    }
    report.rows = rows.size();
    report.subjects = subject_set.size();

    for (int f = 0; f < plan.k; ++f) {
        CVReport::Fold fold;
        fold.index = f;

        Dataset train_split{dataset.schema, {}};
        std::vector<const FeatureVector*> test_rows;
        for (const FeatureVector* fv : rows) {
            if (plan.assignments.at(fv->subject_id) == f) test_rows.push_back(fv);
            else train_split.rows.push_back(*fv);
        }

        bool has[2] = {false, false};
        for (const FeatureVector& fv : train_split.rows)
            if (fv.label) has[*fv.label == Label::deviant ? 1 : 0] = true;
        if (test_rows.empty() || !has[0] || !has[1]) {
            fold.skipped = true;
            fold.warning = test_rows.empty() ? "empty test split" : "single-class training split";
            report.folds.push_back(std::move(fold));
            continue;
        }

        const std::unique_ptr<Model> model = train(train_split, config);
        std::vector<std::pair<Label, Label>> outcomes;
        outcomes.reserve(test_rows.size());
        for (const FeatureVector* fv : test_rows)
            outcomes.emplace_back(predict(*model, *fv, dataset.schema).as_label(), *fv->label);
        fold.metrics = confusion_metrics(outcomes);
        report.pooled += fold.metrics;
        report.folds.push_back(std::move(fold));
    }
    return report;
}

} // namespace rehabkit
