#pragma once

#include <iosfwd>
#include <vector>

#include "rehabkit/learners/tree.hpp"

namespace rehabkit {

/// L2-regularized logistic regression trained by iteratively reweighted
/// least squares with step halving. The weight vector carries the
/// intercept in its last slot.
class LogisticModel : public Model {
public:
    LogisticModel(std::vector<double> weights, std::uint64_t schema_hash, std::uint64_t seed,
                  int dimension)
        : Model(Algorithm::logistic, schema_hash, seed, dimension), weights_(std::move(weights)) {}

    static std::unique_ptr<LogisticModel> fit(const Dataset& dataset, const LogisticParams& params,
                                              std::uint64_t seed);

    const std::vector<double>& weights() const { return weights_; }
    void write_params(std::ostream& os) const override;
    static std::unique_ptr<LogisticModel> read_params(std::istream& is, std::uint64_t schema_hash,
                                                      std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    std::vector<double> weights_; // size dimension + 1
};

/// Penalized negative log-likelihood and its analytic gradient over
/// weights (intercept last, ridge applied to every coefficient). X rows
/// are the bare feature vectors; the intercept column is implicit.
double logistic_nll(std::span<const double> w, const DataMatrix& X, std::span<const int> y,
                    double ridge);
std::vector<double> logistic_gradient(std::span<const double> w, const DataMatrix& X,
                                      std::span<const int> y, double ridge);

} // namespace rehabkit
