#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rehabkit/features.hpp"
#include "rehabkit/types.hpp"

namespace rehabkit {

enum class Algorithm { logistic, smo, adaboost, random_forest, c45, hoeffding };

const char* algorithm_id(Algorithm a);
Algorithm algorithm_from_id(const std::string& id);

/// Labeled feature matrix conforming to one schema.
struct Dataset {
    FeatureSchema schema = FeatureSchema::standard();
    std::vector<FeatureVector> rows;

    /// Row lengths match the schema, labels present and binary.
    void validate() const;
};

struct LogisticParams {
    double ridge = 1e-8;
    int max_iters = 200;
    double grad_tolerance = 1e-8;
};
struct SmoParams {
    double c = 1.0;
    double tolerance = 1e-3;
};
struct AdaBoostParams {
    int rounds = 10;
};
struct ForestParams {
    int trees = 100;
    bool bootstrap = true;
    int mtry = 0;      // 0 = ceil(sqrt(d))
    int min_leaf = 1;
};
struct C45Params {
    double confidence = 0.25;
    int min_leaf = 2;
    bool prune = true;
};
struct HoeffdingParams {
    double delta = 1e-7;
    double tau = 0.05;
    int grace_period = 200;
    int split_candidates = 10; // thresholds probed per numeric attribute
};

struct TrainConfig {
    Algorithm algorithm = Algorithm::random_forest;
    std::uint64_t seed = 0;
    LogisticParams logistic;
    SmoParams smo;
    AdaBoostParams adaboost;
    ForestParams forest;
    C45Params c45;
    HoeffdingParams hoeffding;
};

/// Class index (0 = correct / negative, 1 = deviant / positive) plus the
/// confidence for that predicted class. Ties at 0.5 go to the positive
/// class so possible execution errors are flagged rather than missed.
struct Prediction {
    int label = 0;
    double score = 0.0;
    Label as_label() const { return label ? Label::deviant : Label::correct; }
};

/// A trained, immutable binary classifier.
class Model {
public:
    virtual ~Model() = default;

    Algorithm algorithm() const { return algorithm_; }
    std::uint64_t schema_hash() const { return schema_hash_; }
    std::uint64_t seed() const { return seed_; }
    int dimension() const { return dimension_; }

    /// Throws ModelError if the vector length does not match the
    /// training dimension.
    Prediction predict(std::span<const double> values) const;

    /// Algorithm-specific parameter block of the model file format.
    virtual void write_params(std::ostream& os) const = 0;

protected:
    Model(Algorithm a, std::uint64_t schema_hash, std::uint64_t seed, int dimension)
        : algorithm_(a), schema_hash_(schema_hash), seed_(seed), dimension_(dimension) {}
    virtual Prediction do_predict(std::span<const double> values) const = 0;

private:
    Algorithm algorithm_;
    std::uint64_t schema_hash_;
    std::uint64_t seed_;
    int dimension_;
};

/// Trains one model. Deterministic given (row order, seed). Throws
/// std::invalid_argument on an empty dataset or degenerate labels.
std::unique_ptr<Model> train(const Dataset& dataset, const TrainConfig& config);

/// Schema-checked prediction for a repetition vector.
Prediction predict(const Model& model, const FeatureVector& fv, const FeatureSchema& schema);

/// sqrt(range^2 * ln(1/delta) / (2 n)).
double hoeffding_bound(double range, double delta, std::uint64_t n);

} // namespace rehabkit
