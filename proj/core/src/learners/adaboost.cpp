#include "rehabkit/learners/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rehabkit/errors.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit {

Stump fit_stump(const DataMatrix& X, std::span<const int> y, std::span<const double> weights) {
    Stump best;
    double best_err = 2.0;
    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(X.rows));

    double total_pos = 0.0; // weight of class 1
    for (int i = 0; i < X.rows; ++i)
        if (y[static_cast<std::size_t>(i)] == 1) total_pos += weights[static_cast<std::size_t>(i)];
    double total = 0.0;
    for (const double w : weights) total += w;

    for (int f = 0; f < X.cols; ++f) {
        for (int i = 0; i < X.rows; ++i)
            order[static_cast<std::size_t>(i)] = {X.at(i, f), i};
        std::sort(order.begin(), order.end());

        // Sweep thresholds; left_pos/left_neg accumulate weights of class
        // 1/0 at or below the candidate threshold.
        double left_pos = 0.0, left_neg = 0.0;
        for (int i = 0; i + 1 <= X.rows; ++i) {
            const int row = order[static_cast<std::size_t>(i)].second;
            if (y[static_cast<std::size_t>(row)] == 1)
                left_pos += weights[static_cast<std::size_t>(row)];
            else
                left_neg += weights[static_cast<std::size_t>(row)];
            if (i + 1 < X.rows && order[static_cast<std::size_t>(i)].first ==
                                      order[static_cast<std::size_t>(i) + 1].first)
                continue;
            if (i + 1 == X.rows) break; // no split beyond the last value
            const double threshold = 0.5 * (order[static_cast<std::size_t>(i)].first +
                                            order[static_cast<std::size_t>(i) + 1].first);
            // polarity +1: right side positive -> errors = pos on left + neg on right
            const double err_right = left_pos + (total - total_pos - left_neg);
            // polarity -1: left side positive -> errors = neg on left + pos on right
            const double err_left = left_neg + (total_pos - left_pos);
            if (err_right < best_err - 1e-15) {
                best_err = err_right;
                best = {f, threshold, +1, 0.0};
            }
            if (err_left < best_err - 1e-15) {
                best_err = err_left;
                best = {f, threshold, -1, 0.0};
            }
        }
    }
    // Degenerate data (all features constant): constant classifier voting
    // the majority class.
    if (best_err > 1.0) {
        const bool majority_pos = total_pos >= total - total_pos;
        best = {0, std::numeric_limits<double>::lowest(), majority_pos ? +1 : -1, 0.0};
    }
    return best;
}

BoostTrace adaboost_trace(const DataMatrix& X, std::span<const int> y, int rounds) {
    const int n = X.rows;
    BoostTrace trace;
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);

    auto staged_error = [&]() {
        int wrong_count = 0;
        for (int i = 0; i < n; ++i) {
            double votes[2] = {0.0, 0.0};
            for (const Stump& s : trace.stumps) votes[s.classify(X.row(i))] += s.alpha;
            const int pred = votes[1] >= votes[0] ? 1 : 0;
            wrong_count += pred != y[static_cast<std::size_t>(i)] ? 1 : 0;
        }
        return static_cast<double>(wrong_count) / n;
    };

    for (int round = 0; round < rounds; ++round) {
        Stump s = fit_stump(X, y, w);
        double err = 0.0;
        std::vector<char> wrong(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            if (s.classify(X.row(i)) != y[static_cast<std::size_t>(i)]) {
                wrong[static_cast<std::size_t>(i)] = 1;
                err += w[static_cast<std::size_t>(i)];
            }
        }
        if (err >= 0.5) break; // weak learner no better than chance
        const double eps = std::max(err, 1e-10);
        const double beta = eps / (1.0 - eps);
        s.alpha = std::log(1.0 / beta);
        trace.stumps.push_back(s);
        trace.ensemble_errors.push_back(staged_error());
        if (err <= 0.0) break; // perfect stump dominates; reweighting degenerates

        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!wrong[static_cast<std::size_t>(i)]) w[static_cast<std::size_t>(i)] *= beta;
            sum += w[static_cast<std::size_t>(i)];
        }
        for (double& wi : w) wi /= sum;
        double check = 0.0;
        for (const double wi : w) check += wi;
        trace.weight_sums.push_back(check);
    }
    return trace;
}

std::unique_ptr<AdaBoostModel> AdaBoostModel::fit(const Dataset& dataset,
                                                  const AdaBoostParams& params,
                                                  std::uint64_t seed) {
    const DataMatrix X = to_matrix(dataset);
    const std::vector<int> y = to_class_labels(dataset);
    BoostTrace trace = adaboost_trace(X, y, params.rounds);
    return std::make_unique<AdaBoostModel>(std::move(trace.stumps), dataset.schema.hash(), seed,
                                           X.cols);
}

Prediction AdaBoostModel::do_predict(std::span<const double> x) const {
    double votes[2] = {0.0, 0.0};
    for (const Stump& s : stumps_) votes[s.classify(x)] += s.alpha;
    const double total = votes[0] + votes[1];
    const double p1 = total > 0.0 ? votes[1] / total : 0.5;
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

void AdaBoostModel::write_params(std::ostream& os) const {
    os << "stumps " << stumps_.size() << '\n';
    for (const Stump& s : stumps_) {
        os << s.feature << ' ';
        textio::write_double(os, s.threshold);
        os << ' ' << s.polarity << ' ';
        textio::write_double(os, s.alpha);
        os << '\n';
    }
}

std::unique_ptr<AdaBoostModel> AdaBoostModel::read_params(std::istream& is,
                                                          std::uint64_t schema_hash,
                                                          std::uint64_t seed, int dimension) {
    const auto head = textio::split(textio::expect_line(is, "adaboost header"));
    if (head.size() != 2 || head[0] != "stumps") throw ModelError("malformed adaboost header");
    const auto count = textio::parse_u64(head[1]);
    std::vector<Stump> stumps(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto tok = textio::split(textio::expect_line(is, "stump"));
        if (tok.size() != 4) throw ModelError("malformed stump");
        stumps[i].feature = static_cast<int>(textio::parse_int(tok[0]));
        stumps[i].threshold = textio::parse_double(tok[1]);
        stumps[i].polarity = static_cast<int>(textio::parse_int(tok[2]));
        stumps[i].alpha = textio::parse_double(tok[3]);
    }
    return std::make_unique<AdaBoostModel>(std::move(stumps), schema_hash, seed, dimension);
}

} // namespace rehabkit
