#pragma once

#include <iosfwd>
#include <vector>

#include "rehabkit/learners/tree.hpp"

namespace rehabkit {

/// Linear SVM trained with sequential minimal optimization. Features are
/// standardized internally; the stored weight vector acts on standardized
/// inputs. Scores are logistic squashings of the signed margin.
class SmoModel : public Model {
public:
    SmoModel(std::vector<double> w, double bias, std::vector<double> mean,
             std::vector<double> scale, std::uint64_t schema_hash, std::uint64_t seed,
             int dimension)
        : Model(Algorithm::smo, schema_hash, seed, dimension), w_(std::move(w)), bias_(bias),
          mean_(std::move(mean)), scale_(std::move(scale)) {}

    static std::unique_ptr<SmoModel> fit(const Dataset& dataset, const SmoParams& params,
                                         std::uint64_t seed);

    double decision_value(std::span<const double> x) const;
    void write_params(std::ostream& os) const override;
    static std::unique_ptr<SmoModel> read_params(std::istream& is, std::uint64_t schema_hash,
                                                 std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    std::vector<double> w_;
    double bias_ = 0.0; // decision f(x) = w.x_std - bias
    std::vector<double> mean_, scale_;
};

/// Raw trainer state exposed for the KKT verification tests.
struct SmoTrainResult {
    std::vector<double> alphas;
    std::vector<int> y_signed;           // -1 / +1 per row
    std::vector<double> decision_values; // on the training rows
    double bias = 0.0;
    double c = 1.0;
};

SmoTrainResult smo_optimize(const DataMatrix& X_standardized, std::span<const int> y,
                            const SmoParams& params, std::uint64_t seed);

} // namespace rehabkit
