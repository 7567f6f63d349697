#pragma once

#include <iosfwd>
#include <vector>

#include "rehabkit/learners/tree.hpp"

namespace rehabkit {

/// One weak learner: predicts class 1 when polarity * value >
/// polarity * threshold.
struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = 1; // +1: right side positive, -1: left side positive
    double alpha = 0.0;

    int classify(std::span<const double> x) const {
        const double v = x[static_cast<std::size_t>(feature)];
        return (polarity > 0 ? v > threshold : v <= threshold) ? 1 : 0;
    }
};

/// AdaBoost.M1 over decision stumps with instance reweighting.
class AdaBoostModel : public Model {
public:
    AdaBoostModel(std::vector<Stump> stumps, std::uint64_t schema_hash, std::uint64_t seed,
                  int dimension)
        : Model(Algorithm::adaboost, schema_hash, seed, dimension), stumps_(std::move(stumps)) {}

    static std::unique_ptr<AdaBoostModel> fit(const Dataset& dataset, const AdaBoostParams& params,
                                              std::uint64_t seed);

    const std::vector<Stump>& stumps() const { return stumps_; }
    void write_params(std::ostream& os) const override;
    static std::unique_ptr<AdaBoostModel> read_params(std::istream& is, std::uint64_t schema_hash,
                                                      std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    std::vector<Stump> stumps_;
};

/// Minimum-weighted-error stump; exposed for the boosting tests.
Stump fit_stump(const DataMatrix& X, std::span<const int> y, std::span<const double> weights);

/// Boosting run with its per-round bookkeeping: instance-weight sums
/// after each reweighting and the staged ensemble training error.
struct BoostTrace {
    std::vector<Stump> stumps;
    std::vector<double> weight_sums;
    std::vector<double> ensemble_errors;
};

BoostTrace adaboost_trace(const DataMatrix& X, std::span<const int> y, int rounds);

} // namespace rehabkit
