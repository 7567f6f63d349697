#include "rehabkit/learners/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rehabkit/errors.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double dot_with_intercept(std::span<const double> w, std::span<const double> x) {
    double z = w[w.size() - 1];
    for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
    return z;
}

// Cholesky solve of A x = b for symmetric positive definite A (in place).
// Retries with growing diagonal jitter when the factorization stalls.
std::vector<double> cholesky_solve(std::vector<double> A, std::vector<double> b, int n) {
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0) {
        std::vector<double> L = A;
        if (jitter > 0.0)
            for (int i = 0; i < n; ++i) L[static_cast<std::size_t>(i) * n + i] += jitter;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = L[static_cast<std::size_t>(i) * n + j];
                for (int k = 0; k < j; ++k)
                    s -= L[static_cast<std::size_t>(i) * n + k] * L[static_cast<std::size_t>(j) * n + k];
                if (i == j) {
                    if (s <= 0.0) { ok = false; break; }
                    L[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
                } else {
                    L[static_cast<std::size_t>(i) * n + j] = s / L[static_cast<std::size_t>(j) * n + j];
                }
            }
        }
        if (!ok) {
            if (jitter > 1e-2) throw std::runtime_error("logistic: Hessian not positive definite");
            continue;
        }
        // forward then backward substitution
        std::vector<double> x = b;
        for (int i = 0; i < n; ++i) {
            double s = x[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k) s -= L[static_cast<std::size_t>(i) * n + k] * x[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(i)] = s / L[static_cast<std::size_t>(i) * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n; ++k) s -= L[static_cast<std::size_t>(k) * n + i] * x[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(i)] = s / L[static_cast<std::size_t>(i) * n + i];
        }
        return x;
    }
}

// Newton step for the (d+1)-dim problem. For wide data (d+1 > n) the
// system is solved through the n-dim Woodbury form instead, which keeps
// the per-iteration cost bounded by the row count.
std::vector<double> newton_step(const DataMatrix& X, std::span<const double> grad,
                                std::span<const double> probs, double ridge) {
    const int n = X.rows;
    const int d1 = X.cols + 1;
    std::vector<double> wdiag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double p = probs[static_cast<std::size_t>(i)];
        wdiag[static_cast<std::size_t>(i)] = std::max(p * (1.0 - p), 1e-10);
    }

    if (d1 <= n) {
        // H = Xt W X + ridge I, with the intercept as an implicit
        // all-ones column.
        std::vector<double> H(static_cast<std::size_t>(d1) * d1, 0.0);
        for (int i = 0; i < n; ++i) {
            const double wi = wdiag[static_cast<std::size_t>(i)];
            const auto xi = X.row(i);
            for (int a = 0; a < d1; ++a) {
                const double va = (a < X.cols ? xi[static_cast<std::size_t>(a)] : 1.0) * wi;
                for (int b = a; b < d1; ++b) {
                    const double vb = b < X.cols ? xi[static_cast<std::size_t>(b)] : 1.0;
                    H[static_cast<std::size_t>(a) * d1 + b] += va * vb;
                }
            }
        }
        for (int a = 0; a < d1; ++a) {
            H[static_cast<std::size_t>(a) * d1 + a] += ridge;
            for (int b = 0; b < a; ++b)
                H[static_cast<std::size_t>(a) * d1 + b] = H[static_cast<std::size_t>(b) * d1 + a];
        }
        return cholesky_solve(std::move(H), std::vector<double>(grad.begin(), grad.end()), d1);
    }

    // Woodbury: (ridge I + Xt W X)^-1 g
    //   = (g - Xt (ridge W^-1 + X Xt)^-1 X g) / ridge.
    std::vector<double> Xg(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto xi = X.row(i);
        double s = grad[static_cast<std::size_t>(d1 - 1)]; // intercept column
        for (int j = 0; j < X.cols; ++j) s += xi[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
        Xg[static_cast<std::size_t>(i)] = s;
    }
    std::vector<double> M(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto xi = X.row(i);
        for (int j = i; j < n; ++j) {
            const auto xj = X.row(j);
            double s = 1.0; // intercept x intercept
            for (int k = 0; k < X.cols; ++k) s += xi[static_cast<std::size_t>(k)] * xj[static_cast<std::size_t>(k)];
            M[static_cast<std::size_t>(i) * n + j] = s;
            M[static_cast<std::size_t>(j) * n + i] = s;
        }
    }
    for (int i = 0; i < n; ++i)
        M[static_cast<std::size_t>(i) * n + i] += ridge / wdiag[static_cast<std::size_t>(i)];
    const std::vector<double> u = cholesky_solve(std::move(M), Xg, n);

    std::vector<double> step(grad.begin(), grad.end());
    for (int i = 0; i < n; ++i) {
        const auto xi = X.row(i);
        const double ui = u[static_cast<std::size_t>(i)];
        for (int j = 0; j < X.cols; ++j) step[static_cast<std::size_t>(j)] -= xi[static_cast<std::size_t>(j)] * ui;
        step[static_cast<std::size_t>(d1 - 1)] -= ui;
    }
    for (double& v : step) v /= ridge;
    return step;
}

} // namespace

double logistic_nll(std::span<const double> w, const DataMatrix& X, std::span<const int> y,
                    double ridge) {
    double nll = 0.0;
    for (int i = 0; i < X.rows; ++i) {
        const double z = dot_with_intercept(w, X.row(i));
        // -log p(y|x) = log(1 + e^z) - y z, computed stably
        nll += (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) -
               y[static_cast<std::size_t>(i)] * z;
    }
    double reg = 0.0;
    for (const double wi : w) reg += wi * wi;
    return nll + 0.5 * ridge * reg;
}

std::vector<double> logistic_gradient(std::span<const double> w, const DataMatrix& X,
                                      std::span<const int> y, double ridge) {
    std::vector<double> g(w.size(), 0.0);
    for (int i = 0; i < X.rows; ++i) {
        const auto xi = X.row(i);
        const double r = sigmoid(dot_with_intercept(w, xi)) - y[static_cast<std::size_t>(i)];
        for (int j = 0; j < X.cols; ++j) g[static_cast<std::size_t>(j)] += r * xi[static_cast<std::size_t>(j)];
        g[w.size() - 1] += r;
    }
    for (std::size_t j = 0; j < w.size(); ++j) g[j] += ridge * w[j];
    return g;
}

std::unique_ptr<LogisticModel> LogisticModel::fit(const Dataset& dataset,
                                                  const LogisticParams& params,
                                                  std::uint64_t seed) {
    const DataMatrix X = to_matrix(dataset);
    const std::vector<int> y = to_class_labels(dataset);
    const int d1 = X.cols + 1;

    std::vector<double> w(static_cast<std::size_t>(d1), 0.0);
    std::vector<double> probs(static_cast<std::size_t>(X.rows), 0.0);
    double nll = logistic_nll(w, X, y, params.ridge);

    for (int iter = 0; iter < params.max_iters; ++iter) {
        for (int i = 0; i < X.rows; ++i)
            probs[static_cast<std::size_t>(i)] = sigmoid(dot_with_intercept(w, X.row(i)));
        const std::vector<double> g = logistic_gradient(w, X, y, params.ridge);
        double gnorm = 0.0;
        for (const double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm < params.grad_tolerance) break;

        const std::vector<double> step = newton_step(X, g, probs, params.ridge);

        // Step halving keeps the penalized NLL monotone.
        double scale = 1.0;
        std::vector<double> trial(w.size());
        bool improved = false;
        for (int h = 0; h < 40; ++h, scale *= 0.5) {
            for (std::size_t j = 0; j < w.size(); ++j) trial[j] = w[j] - scale * step[j];
            const double trial_nll = logistic_nll(trial, X, y, params.ridge);
            if (trial_nll <= nll) {
                w = trial;
                nll = trial_nll;
                improved = true;
                break;
            }
        }
        if (!improved) break; // stalled at numerical precision
    }
    return std::make_unique<LogisticModel>(std::move(w), dataset.schema.hash(), seed, X.cols);
}

Prediction LogisticModel::do_predict(std::span<const double> x) const {
    const double p1 = sigmoid(dot_with_intercept(weights_, x));
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

void LogisticModel::write_params(std::ostream& os) const {
    os << "weights ";
    textio::write_doubles(os, weights_);
    os << '\n';
}

std::unique_ptr<LogisticModel> LogisticModel::read_params(std::istream& is,
                                                          std::uint64_t schema_hash,
                                                          std::uint64_t seed, int dimension) {
    const auto tok = textio::split(textio::expect_line(is, "logistic weights"));
    if (tok.size() < 2 || tok[0] != "weights") throw ModelError("malformed logistic weights");
    std::vector<double> w;
    w.reserve(tok.size() - 1);
    for (std::size_t i = 1; i < tok.size(); ++i) w.push_back(textio::parse_double(tok[i]));
    if (static_cast<int>(w.size()) != dimension + 1)
        throw ModelError("logistic weight count does not match dimension");
    return std::make_unique<LogisticModel>(std::move(w), schema_hash, seed, dimension);
}

} // namespace rehabkit
