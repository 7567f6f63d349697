#include "rehabkit/learners/smo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rehabkit/errors.hpp"
#include "rehabkit/rng.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Platt-style SMO on a linear kernel. The weight vector is maintained
// incrementally so kernel evaluations stay O(d).
struct Optimizer {
    const DataMatrix& X;
    std::vector<int> y; // -1 / +1
    double c;
    double tol;
    Rng rng;
    std::vector<double> alpha;
    std::vector<double> w;
    double b = 0.0; // f(x) = w.x - b

    Optimizer(const DataMatrix& X_, std::span<const int> y01, const SmoParams& p,
              std::uint64_t seed)
        : X(X_), c(p.c), tol(p.tolerance), rng(seed),
          alpha(static_cast<std::size_t>(X_.rows), 0.0),
          w(static_cast<std::size_t>(X_.cols), 0.0) {
        y.reserve(y01.size());
        for (const int v : y01) y.push_back(v == 1 ? 1 : -1);
    }

    double f(int i) const {
        const auto xi = X.row(i);
        double s = -b;
        for (int j = 0; j < X.cols; ++j) s += w[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
        return s;
    }

    double kernel(int i, int j) const {
        const auto xi = X.row(i);
        const auto xj = X.row(j);
        double s = 0.0;
        for (int k = 0; k < X.cols; ++k) s += xi[static_cast<std::size_t>(k)] * xj[static_cast<std::size_t>(k)];
        return s;
    }

    bool take_step(int i1, int i2, double e2) {
        if (i1 == i2) return false;
        const double a1 = alpha[static_cast<std::size_t>(i1)];
        const double a2 = alpha[static_cast<std::size_t>(i2)];
        const int y1 = y[static_cast<std::size_t>(i1)];
        const int y2 = y[static_cast<std::size_t>(i2)];
        const double e1 = f(i1) - y1;
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c, c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c);
            hi = std::min(c, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = kernel(i1, i1);
        const double k12 = kernel(i1, i2);
        const double k22 = kernel(i2, i2);
        const double eta = 2.0 * k12 - k11 - k22;
        double a2_new;
        if (eta < 0.0) {
            a2_new = a2 - y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // Degenerate curvature (duplicate rows under a linear
            // kernel): evaluate the objective at both interval ends.
            const double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (lobj < hobj - 1e-12) a2_new = lo;
            else if (lobj > hobj + 1e-12) a2_new = hi;
            else return false;
        }
        if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
        const double a1_new = a1 + s * (a2 - a2_new);

        // Threshold update (Platt's b1/b2 rule).
        const double b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + b;
        const double b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + b;
        if (a1_new > 0.0 && a1_new < c) b = b1;
        else if (a2_new > 0.0 && a2_new < c) b = b2;
        else b = 0.5 * (b1 + b2);

        const auto x1 = X.row(i1);
        const auto x2 = X.row(i2);
        for (int k = 0; k < X.cols; ++k)
            w[static_cast<std::size_t>(k)] += y1 * (a1_new - a1) * x1[static_cast<std::size_t>(k)] +
                                              y2 * (a2_new - a2) * x2[static_cast<std::size_t>(k)];
        alpha[static_cast<std::size_t>(i1)] = a1_new;
        alpha[static_cast<std::size_t>(i2)] = a2_new;
        return true;
    }

    bool examine(int i2) {
        const int y2 = y[static_cast<std::size_t>(i2)];
        const double a2 = alpha[static_cast<std::size_t>(i2)];
        const double e2 = f(i2) - y2;
        const double r2 = e2 * y2;
        if (!((r2 < -tol && a2 < c) || (r2 > tol && a2 > 0.0))) return false;

        // Second-choice heuristic: maximal |e1 - e2| over non-bound rows.
        int best = -1;
        double best_gap = 0.0;
        for (int i = 0; i < X.rows; ++i) {
            const double a = alpha[static_cast<std::size_t>(i)];
            if (a <= 0.0 || a >= c) continue;
            const double gap = std::abs(f(i) - y[static_cast<std::size_t>(i)] - e2);
            if (gap > best_gap) { best_gap = gap; best = i; }
        }
        if (best >= 0 && take_step(best, i2, e2)) return true;

        const int n = X.rows;
        const int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        for (int k = 0; k < n; ++k) {
            const int i1 = (start + k) % n;
            const double a = alpha[static_cast<std::size_t>(i1)];
            if (a <= 0.0 || a >= c) continue;
            if (take_step(i1, i2, e2)) return true;
        }
        const int start2 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        for (int k = 0; k < n; ++k) {
            if (take_step((start2 + k) % n, i2, e2)) return true;
        }
        return false;
    }

    void run() {
        int num_changed = 0;
        bool examine_all = true;
        int sweeps = 0;
        const int max_sweeps = 1000; // safety bound; convergence is typically far earlier
        while ((num_changed > 0 || examine_all) && sweeps++ < max_sweeps) {
            num_changed = 0;
            if (examine_all) {
                for (int i = 0; i < X.rows; ++i) num_changed += examine(i) ? 1 : 0;
            } else {
                for (int i = 0; i < X.rows; ++i) {
                    const double a = alpha[static_cast<std::size_t>(i)];
                    if (a > 0.0 && a < c) num_changed += examine(i) ? 1 : 0;
                }
            }
            if (examine_all) examine_all = false;
            else if (num_changed == 0) examine_all = true;
        }
    }
};

} // namespace

SmoTrainResult smo_optimize(const DataMatrix& X_standardized, std::span<const int> y,
                            const SmoParams& params, std::uint64_t seed) {
    Optimizer opt(X_standardized, y, params, seed);
    opt.run();
    SmoTrainResult result;
    result.alphas = std::move(opt.alpha);
    result.y_signed = opt.y;
    result.bias = opt.b;
    result.c = params.c;
    result.decision_values.reserve(static_cast<std::size_t>(X_standardized.rows));
    for (int i = 0; i < X_standardized.rows; ++i) {
        const auto xi = X_standardized.row(i);
        double s = -opt.b;
        for (int j = 0; j < X_standardized.cols; ++j)
            s += opt.w[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
        result.decision_values.push_back(s);
    }
    return result;
}

std::unique_ptr<SmoModel> SmoModel::fit(const Dataset& dataset, const SmoParams& params,
                                        std::uint64_t seed) {
    DataMatrix X = to_matrix(dataset);
    const std::vector<int> y = to_class_labels(dataset);

    // Internal standardization; constant features get unit scale.
    std::vector<double> mean(static_cast<std::size_t>(X.cols), 0.0);
    std::vector<double> scale(static_cast<std::size_t>(X.cols), 1.0);
    for (int j = 0; j < X.cols; ++j) {
        double m = 0.0;
        for (int i = 0; i < X.rows; ++i) m += X.at(i, j);
        m /= X.rows;
        double v = 0.0;
        for (int i = 0; i < X.rows; ++i) {
            const double d = X.at(i, j) - m;
            v += d * d;
        }
        v = std::sqrt(v / X.rows);
        mean[static_cast<std::size_t>(j)] = m;
        scale[static_cast<std::size_t>(j)] = v > 0.0 ? v : 1.0;
    }
    for (int i = 0; i < X.rows; ++i)
        for (int j = 0; j < X.cols; ++j)
            X.data[static_cast<std::size_t>(i) * X.cols + j] =
                (X.at(i, j) - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];

    Optimizer opt(X, y, params, seed);
    opt.run();
    return std::make_unique<SmoModel>(std::move(opt.w), opt.b, std::move(mean), std::move(scale),
                                      dataset.schema.hash(), seed, X.cols);
}

double SmoModel::decision_value(std::span<const double> x) const {
    double s = -bias_;
    for (std::size_t j = 0; j < w_.size(); ++j)
        s += w_[j] * (x[j] - mean_[j]) / scale_[j];
    return s;
}

Prediction SmoModel::do_predict(std::span<const double> x) const {
    const double p1 = sigmoid(decision_value(x));
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

void SmoModel::write_params(std::ostream& os) const {
    os << "w ";
    textio::write_doubles(os, w_);
    os << "\nbias ";
    textio::write_double(os, bias_);
    os << "\nmean ";
    textio::write_doubles(os, mean_);
    os << "\nscale ";
    textio::write_doubles(os, scale_);
    os << '\n';
}

namespace {
std::vector<double> read_vector_line(std::istream& is, const char* key, int expected) {
    const auto tok = textio::split(textio::expect_line(is, key));
    if (tok.empty() || tok[0] != key) throw ModelError(std::string("expected '") + key + "' line");
    std::vector<double> v;
    v.reserve(tok.size() - 1);
    for (std::size_t i = 1; i < tok.size(); ++i) v.push_back(textio::parse_double(tok[i]));
    if (expected >= 0 && static_cast<int>(v.size()) != expected)
        throw ModelError(std::string("bad vector length for '") + key + "'");
    return v;
}
} // namespace

std::unique_ptr<SmoModel> SmoModel::read_params(std::istream& is, std::uint64_t schema_hash,
                                                std::uint64_t seed, int dimension) {
    auto w = read_vector_line(is, "w", dimension);
    const auto bias = read_vector_line(is, "bias", 1);
    auto mean = read_vector_line(is, "mean", dimension);
    auto scale = read_vector_line(is, "scale", dimension);
    return std::make_unique<SmoModel>(std::move(w), bias[0], std::move(mean), std::move(scale),
                                      schema_hash, seed, dimension);
}

} // namespace rehabkit
