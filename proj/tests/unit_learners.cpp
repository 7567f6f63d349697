#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rehabkit/errors.hpp"
#include "rehabkit/learners.hpp"
#include "rehabkit/learners/adaboost.hpp"
#include "rehabkit/learners/hoeffding.hpp"
#include "rehabkit/learners/logistic.hpp"
#include "rehabkit/learners/smo.hpp"
#include "rehabkit/learners/tree.hpp"

using namespace rehabkit;

namespace {

const std::array<Algorithm, 5> kBatchAlgorithms = {Algorithm::logistic, Algorithm::smo,
                                                   Algorithm::adaboost, Algorithm::random_forest,
                                                   Algorithm::c45};

double training_accuracy(const Model& model, const Dataset& ds) {
    int correct = 0;
    for (const FeatureVector& fv : ds.rows)
        correct += model.predict(fv.values).as_label() == *fv.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(ds.rows.size());
}

std::string serialize(const Model& model) {
    std::ostringstream os;
    os << algorithm_id(model.algorithm()) << '\n' << model.seed() << '\n';
    model.write_params(os);
    return os.str();
}

} // namespace

TEST_CASE("hoeffding bound formula") {
    CHECK(hoeffding_bound(1.0, 1.0, 10) == 0.0);
    CHECK(hoeffding_bound(1.0, 1e-7, 200) == doctest::Approx(0.20073674085078647).epsilon(1e-12));
    // doubling n divides the bound by sqrt(2)
    const double b1 = hoeffding_bound(2.0, 0.05, 300);
    const double b2 = hoeffding_bound(2.0, 0.05, 600);
    CHECK(b1 / b2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(static_cast<void>(hoeffding_bound(1.0, 0.5, 0)), std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(hoeffding_bound(1.0, 1.5, 5)), std::invalid_argument);
}

TEST_CASE("hoeffding tree stays a single leaf before the grace period") {
    HoeffdingParams params; // grace 200
    HoeffdingTree tree(params, 0, 0, 2);
    Rng rng(1);
    for (int i = 0; i < 199; ++i) {
        const double x[2] = {rng.next_gaussian() + (i % 3 ? 4.0 : -4.0), rng.next_gaussian()};
        tree.update(x, i % 3 ? 1 : 0);
    }
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.predict(std::vector<double>{-4.0, 0.0}).label == 1); // majority class
}

TEST_CASE("hoeffding tree separates two Gaussian classes") {
    HoeffdingParams params;
    HoeffdingTree tree(params, 0, 0, 2);
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const int cls = static_cast<int>(rng.next_below(2));
        const double x[2] = {rng.next_gaussian() + (cls ? 3.0 : -3.0),
                             rng.next_gaussian() + (cls ? -1.0 : 1.0)};
        tree.update(x, cls);
    }
    CHECK(tree.nodes().size() > 1);
    int correct = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
        const int cls = static_cast<int>(rng.next_below(2));
        const double x[2] = {rng.next_gaussian() + (cls ? 3.0 : -3.0),
                             rng.next_gaussian() + (cls ? -1.0 : 1.0)};
        correct += tree.predict(std::span<const double>(x, 2)).label == cls ? 1 : 0;
        ++total;
    }
    CHECK(static_cast<double>(correct) / total >= 0.95);
}

TEST_CASE("hoeffding tree never splits on constant features") {
    HoeffdingParams params;
    HoeffdingTree tree(params, 0, 0, 3);
    for (int i = 0; i < 2000; ++i) {
        const double x[3] = {1.0, 2.0, 3.0};
        tree.update(x, i % 3 == 0 ? 1 : 0);
    }
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.predict(std::vector<double>{1.0, 2.0, 3.0}).label == 0);
}

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 20, d = 4;
        DataMatrix X;
        X.rows = n;
        X.cols = d;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) X.data.push_back(rng.next_gaussian());
            y.push_back(static_cast<int>(rng.next_below(2)));
        }
        std::vector<double> w(static_cast<std::size_t>(d) + 1);
        for (auto& v : w) v = rng.next_gaussian() * 0.5;

        const double ridge = 0.01;
        const auto grad = logistic_gradient(w, X, y, ridge);
        const double h = 1e-6;
        for (std::size_t j = 0; j < w.size(); ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (logistic_nll(wp, X, y, ridge) - logistic_nll(wm, X, y, ridge)) /
                              (2.0 * h);
            CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("all five batch learners reach training accuracy 1.0 on separable blobs") {
    // margin >= 4 sigma: blob centers 8 apart with unit sigma
    const Dataset ds = helpers::gaussian_blobs(60, 2, 8.0, 99);
    for (const Algorithm algo : kBatchAlgorithms) {
        CAPTURE(algorithm_id(algo));
        TrainConfig config;
        config.algorithm = algo;
        config.seed = 5;
        const auto model = train(ds, config);
        CHECK(training_accuracy(*model, ds) == 1.0);
    }
}

TEST_CASE("held-out points from the blob distribution are classified correctly") {
    const Dataset train_ds = helpers::gaussian_blobs(60, 2, 8.0, 123);
    const Dataset test_ds = helpers::gaussian_blobs(40, 2, 8.0, 321);
    for (const Algorithm algo : kBatchAlgorithms) {
        CAPTURE(algorithm_id(algo));
        TrainConfig config;
        config.algorithm = algo;
        config.seed = 9;
        const auto model = train(train_ds, config);
        CHECK(training_accuracy(*model, test_ds) == 1.0);
    }
}

TEST_CASE("training errors: empty dataset and degenerate labels") {
    Dataset empty;
    TrainConfig config;
    CHECK_THROWS_WITH_AS(static_cast<void>(train(empty, config)),
                         doctest::Contains("empty dataset"), std::invalid_argument);

    Dataset single = helpers::gaussian_blobs(10, 2, 4.0, 1);
    for (auto& row : single.rows) row.label = Label::correct;
    CHECK_THROWS_WITH_AS(static_cast<void>(train(single, config)),
                         doctest::Contains("degenerate labels"), std::invalid_argument);
}

TEST_CASE("training twice with the same seed yields byte-identical models") {
    const Dataset ds = helpers::gaussian_blobs(40, 3, 6.0, 77);
    for (const Algorithm algo : kBatchAlgorithms) {
        CAPTURE(algorithm_id(algo));
        TrainConfig config;
        config.algorithm = algo;
        config.seed = 1234;
        const auto a = train(ds, config);
        const auto b = train(ds, config);
        CHECK(serialize(*a) == serialize(*b));
    }
}

TEST_CASE("logistic model with zero weights predicts the tie class at 0.5") {
    const LogisticModel model(std::vector<double>(4, 0.0), 0, 0, 3);
    const Prediction p = model.predict(std::vector<double>{1.0, -2.0, 0.5});
    CHECK(p.score == 0.5);
    CHECK(p.label == 1);
    CHECK(p.as_label() == Label::deviant);
}

TEST_CASE("unanimous forest vote scores 1.0") {
    const Dataset ds = helpers::gaussian_blobs(50, 2, 8.0, 13);
    TrainConfig config;
    config.algorithm = Algorithm::random_forest;
    const auto model = train(ds, config);
    const Prediction p = model->predict(std::vector<double>{4.0, 4.0}); // deep in class 1
    CHECK(p.label == 1);
    CHECK(p.score == 1.0);
}

TEST_CASE("prediction dimension mismatch raises a model error") {
    const Dataset ds = helpers::gaussian_blobs(30, 2, 8.0, 3);
    TrainConfig config;
    config.algorithm = Algorithm::c45;
    const auto model = train(ds, config);
    CHECK_THROWS_AS(static_cast<void>(model->predict(std::vector<double>{1.0, 2.0, 3.0})),
                    ModelError);
}

TEST_CASE("SMO satisfies the KKT conditions at convergence") {
    const Dataset ds = helpers::gaussian_blobs(80, 3, 3.0, 55);
    DataMatrix X = to_matrix(ds);
    const std::vector<int> y = to_class_labels(ds);

    // standardize as SmoModel::fit does
    for (int j = 0; j < X.cols; ++j) {
        double m = 0.0, v = 0.0;
        for (int i = 0; i < X.rows; ++i) m += X.at(i, j);
        m /= X.rows;
        for (int i = 0; i < X.rows; ++i) v += (X.at(i, j) - m) * (X.at(i, j) - m);
        v = std::sqrt(v / X.rows);
        for (int i = 0; i < X.rows; ++i)
            X.data[static_cast<std::size_t>(i) * X.cols + j] = (X.at(i, j) - m) / (v > 0 ? v : 1.0);
    }

    SmoParams params;
    const SmoTrainResult result = smo_optimize(X, y, params, 11);

    double alpha_dot_y = 0.0;
    for (std::size_t i = 0; i < result.alphas.size(); ++i)
        alpha_dot_y += result.alphas[i] * result.y_signed[i];
    CHECK(std::abs(alpha_dot_y) < 1e-9);

    const double tol = params.tolerance;
    for (std::size_t i = 0; i < result.alphas.size(); ++i) {
        const double margin = result.y_signed[i] * result.decision_values[i];
        const double a = result.alphas[i];
        if (a <= 0.0) CHECK(margin >= 1.0 - tol - 1e-9);
        else if (a >= params.c) CHECK(margin <= 1.0 + tol + 1e-9);
        else CHECK(margin == doctest::Approx(1.0).epsilon(tol + 1e-9));
    }
}

TEST_CASE("adaboost keeps weights normalized and staged error non-increasing") {
    const Dataset ds = helpers::gaussian_blobs(60, 2, 6.0, 31);
    const DataMatrix X = to_matrix(ds);
    const std::vector<int> y = to_class_labels(ds);
    const BoostTrace trace = adaboost_trace(X, y, 10);

    REQUIRE(!trace.stumps.empty());
    for (const double s : trace.weight_sums) CHECK(std::abs(s - 1.0) < 1e-12);
    for (std::size_t r = 1; r < trace.ensemble_errors.size(); ++r)
        CHECK(trace.ensemble_errors[r] <= trace.ensemble_errors[r - 1] + 1e-12);
}

TEST_CASE("a one-tree forest without bootstrap equals its base tree") {
    const Dataset ds = helpers::gaussian_blobs(50, 4, 3.0, 41);
    ForestParams params;
    params.trees = 1;
    params.bootstrap = false;
    params.mtry = 4; // all features: growth independent of the rng draw
    const auto forest = ForestModel::fit(ds, params, 2024);

    const DataMatrix X = to_matrix(ds);
    const std::vector<int> y = to_class_labels(ds);
    std::vector<int> idx(static_cast<std::size_t>(X.rows));
    for (int i = 0; i < X.rows; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(2024, 0)); // the forest's per-tree stream for tree 0
    const auto tree = grow_cart(X, y, idx, 4, 1, rng);

    Rng probe(555);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = probe.uniform(-4.0, 4.0);
        const Prediction pf = forest->predict(x);
        const Prediction pt = tree_predict(tree, x);
        CHECK(pf.label == pt.label);
        CHECK(pf.score == pt.score);
    }
}

TEST_CASE("c45 pruning never grows the tree") {
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        // overlapping blobs so the unpruned tree overfits
        const Dataset ds = helpers::gaussian_blobs(100, 3, 1.0, seed);
        C45Params pruned;
        C45Params raw;
        raw.prune = false;
        const auto a = C45Model::fit(ds, pruned, 0);
        const auto b = C45Model::fit(ds, raw, 0);
        CHECK(a->node_count() <= b->node_count());
        CHECK(a->node_count() >= 1);
        CHECK(b->node_count() > 1);
    }
}

TEST_CASE("hoeffding tree agrees with the batch c45 tree on a stationary stream") {
    Rng rng(808);
    HoeffdingParams hp;
    HoeffdingTree stream_tree(hp, 0, 0, 2);

    Dataset batch;
    batch.schema = FeatureSchema::custom("agree-v1", {"x0", "x1"});
    for (int i = 0; i < 12000; ++i) {
        const int cls = static_cast<int>(rng.next_below(2));
        const double x[2] = {rng.next_gaussian() + (cls ? 2.5 : -2.5),
                             rng.next_gaussian() * 2.0};
        stream_tree.update(x, cls);
        if (i < 2000) {
            FeatureVector fv;
            fv.values = {x[0], x[1]};
            fv.label = cls ? Label::deviant : Label::correct;
            batch.rows.push_back(std::move(fv));
        }
    }
    const auto batch_tree = C45Model::fit(batch, C45Params{}, 0);

    int agree = 0, total = 0;
    for (double x0 = -5.0; x0 <= 5.0; x0 += 0.25) {
        for (double x1 = -5.0; x1 <= 5.0; x1 += 0.25) {
            const std::vector<double> x = {x0, x1};
            agree += stream_tree.predict(x).label == batch_tree->predict(x).label ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(agree) / total >= 0.9);
}

TEST_CASE("label-shuffled data scores at chance level on a shuffled holdout") {
    const Dataset ds = helpers::gaussian_blobs(80, 2, 6.0, 17);
    Rng rng(900);
    for (const Algorithm algo : kBatchAlgorithms) {
        CAPTURE(algorithm_id(algo));
        double acc_sum = 0.0;
        const int shuffles = 20;
        for (int s = 0; s < shuffles; ++s) {
            // permutation null: train and holdout labels are both random
            Dataset shuffled = ds;
            for (auto& row : shuffled.rows)
                row.label = rng.next_below(2) ? Label::deviant : Label::correct;

            Dataset train_half{shuffled.schema, {}};
            Dataset test_half{shuffled.schema, {}};
            for (std::size_t i = 0; i < shuffled.rows.size(); ++i)
                (i % 2 ? test_half : train_half).rows.push_back(shuffled.rows[i]);
            bool has[2] = {false, false};
            for (auto& row : train_half.rows) has[*row.label == Label::deviant] = true;
            if (!has[0] || !has[1]) continue;

            TrainConfig config;
            config.algorithm = algo;
            config.seed = 7;
            const auto model = train(train_half, config);
            acc_sum += training_accuracy(*model, test_half);
        }
        const double mean_acc = acc_sum / shuffles;
        CHECK(mean_acc > 0.4);
        CHECK(mean_acc < 0.6);
    }
}
