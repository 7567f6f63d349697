#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rehabkit/learners.hpp"
#include "rehabkit/rng.hpp"

namespace rehabkit {

/// Row-major view of a dataset's numeric block.
struct DataMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }
};

DataMatrix to_matrix(const Dataset& dataset);
/// 0/1 class per row; throws std::invalid_argument when a label is
/// missing or only one class is present.
std::vector<int> to_class_labels(const Dataset& dataset);

/// Flat binary tree node; feature == -1 marks a leaf. Values routed left
/// when value <= threshold. counts[] hold the training class counts that
/// reached the node.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double counts[2] = {0.0, 0.0};

    bool is_leaf() const { return feature < 0; }
};

int tree_route(const std::vector<TreeNode>& nodes, std::span<const double> x);
Prediction tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> x);
void write_tree(std::ostream& os, const std::vector<TreeNode>& nodes);
std::vector<TreeNode> read_tree(std::istream& is);

/// Gini-impurity CART grower used as the forest base learner. mtry
/// candidate features are drawn per split; ties prefer the lower feature
/// index and threshold, so with mtry == cols the tree is seed-invariant.
std::vector<TreeNode> grow_cart(const DataMatrix& X, std::span<const int> y,
                                std::span<const int> sample_indices, int mtry, int min_leaf,
                                Rng& rng);

class ForestModel : public Model {
public:
    ForestModel(std::vector<std::vector<TreeNode>> trees, std::uint64_t schema_hash,
                std::uint64_t seed, int dimension)
        : Model(Algorithm::random_forest, schema_hash, seed, dimension),
          trees_(std::move(trees)) {}

    static std::unique_ptr<ForestModel> fit(const Dataset& dataset, const ForestParams& params,
                                            std::uint64_t seed);

    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }
    void write_params(std::ostream& os) const override;
    static std::unique_ptr<ForestModel> read_params(std::istream& is, std::uint64_t schema_hash,
                                                    std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    std::vector<std::vector<TreeNode>> trees_;
};

class C45Model : public Model {
public:
    C45Model(std::vector<TreeNode> nodes, std::uint64_t schema_hash, std::uint64_t seed,
             int dimension)
        : Model(Algorithm::c45, schema_hash, seed, dimension), nodes_(std::move(nodes)) {}

    /// Gain-ratio splits with pessimistic error pruning (confidence
    /// factor per params). Set params.prune = false for the raw tree.
    static std::unique_ptr<C45Model> fit(const Dataset& dataset, const C45Params& params,
                                         std::uint64_t seed);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    void write_params(std::ostream& os) const override;
    static std::unique_ptr<C45Model> read_params(std::istream& is, std::uint64_t schema_hash,
                                                 std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    std::vector<TreeNode> nodes_;
};

/// Upper confidence limit on the error count of a leaf observing `n`
/// instances with `e` errors (normal approximation of the binomial tail).
double pessimistic_added_errors(double n, double e, double confidence);

} // namespace rehabkit
