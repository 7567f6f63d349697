#include "rehabkit/learners.hpp"

#include <cmath>
#include <stdexcept>

#include "rehabkit/errors.hpp"
#include "rehabkit/learners/adaboost.hpp"
#include "rehabkit/learners/hoeffding.hpp"
#include "rehabkit/learners/logistic.hpp"
#include "rehabkit/learners/smo.hpp"
#include "rehabkit/learners/tree.hpp"

namespace rehabkit {

const char* algorithm_id(Algorithm a) {
    switch (a) {
    case Algorithm::logistic: return "logistic";
    case Algorithm::smo: return "smo";
    case Algorithm::adaboost: return "adaboost";
    case Algorithm::random_forest: return "rf";
    case Algorithm::c45: return "c45";
    case Algorithm::hoeffding: return "hoeffding";
    }
    return "?";
}

Algorithm algorithm_from_id(const std::string& id) {
    if (id == "logistic") return Algorithm::logistic;
    if (id == "smo") return Algorithm::smo;
    if (id == "adaboost") return Algorithm::adaboost;
    if (id == "rf") return Algorithm::random_forest;
    if (id == "c45") return Algorithm::c45;
    if (id == "hoeffding") return Algorithm::hoeffding;
    throw std::invalid_argument("unknown algorithm: " + id);
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].values.size() != schema.size())
            throw std::invalid_argument("row " + std::to_string(i) +
                                        " does not conform to the feature schema");
}

Prediction Model::predict(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != dimension_)
        throw ModelError("feature vector length does not match model dimension");
    return do_predict(values);
}

std::unique_ptr<Model> train(const Dataset& dataset, const TrainConfig& config) {
    if (dataset.rows.empty()) throw std::invalid_argument("empty dataset");
    dataset.validate();
    switch (config.algorithm) {
    case Algorithm::logistic:
        return LogisticModel::fit(dataset, config.logistic, config.seed);
    case Algorithm::smo:
        return SmoModel::fit(dataset, config.smo, config.seed);
    case Algorithm::adaboost:
        return AdaBoostModel::fit(dataset, config.adaboost, config.seed);
    case Algorithm::random_forest:
        return ForestModel::fit(dataset, config.forest, config.seed);
    case Algorithm::c45:
        return C45Model::fit(dataset, config.c45, config.seed);
    case Algorithm::hoeffding:
        return HoeffdingTree::fit(dataset, config.hoeffding, config.seed);
    }
    throw std::invalid_argument("unknown algorithm");
}

Prediction predict(const Model& model, const FeatureVector& fv, const FeatureSchema& schema) {
    if (model.schema_hash() != schema.hash())
        throw ModelError("feature schema hash does not match the model");
    return model.predict(fv.values);
}

double hoeffding_bound(double range, double delta, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("hoeffding_bound: n must be positive");
    if (!(range > 0.0)) throw std::invalid_argument("hoeffding_bound: range must be positive");
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("hoeffding_bound: delta must be in (0, 1]");
    return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

} // namespace rehabkit
