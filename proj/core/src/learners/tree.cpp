#include "rehabkit/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rehabkit/errors.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit {

DataMatrix to_matrix(const Dataset& dataset) {
    DataMatrix m;
    m.rows = static_cast<int>(dataset.rows.size());
    m.cols = static_cast<int>(dataset.schema.size());
    m.data.reserve(static_cast<std::size_t>(m.rows) * m.cols);
    for (const FeatureVector& fv : dataset.rows)
        m.data.insert(m.data.end(), fv.values.begin(), fv.values.end());
    return m;
}

std::vector<int> to_class_labels(const Dataset& dataset) {
    std::vector<int> y;
    y.reserve(dataset.rows.size());
    bool seen[2] = {false, false};
    for (const FeatureVector& fv : dataset.rows) {
        if (!fv.label) throw std::invalid_argument("unlabeled row in training data");
        const int cls = *fv.label == Label::deviant ? 1 : 0;
        seen[cls] = true;
        y.push_back(cls);
    }
    if (y.empty()) throw std::invalid_argument("empty dataset");
    if (!seen[0] || !seen[1]) throw std::invalid_argument("degenerate labels");
    return y;
}

int tree_route(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return idx;
}

Prediction tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    const TreeNode& leaf = nodes[static_cast<std::size_t>(tree_route(nodes, x))];
    const double total = leaf.counts[0] + leaf.counts[1];
    const double p1 = total > 0.0 ? leaf.counts[1] / total : 0.5;
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

void write_tree(std::ostream& os, const std::vector<TreeNode>& nodes) {
    os << "nodes " << nodes.size() << '\n';
    for (const TreeNode& n : nodes) {
        os << n.feature << ' ';
        textio::write_double(os, n.threshold);
        os << ' ' << n.left << ' ' << n.right << ' ';
        textio::write_double(os, n.counts[0]);
        os << ' ';
        textio::write_double(os, n.counts[1]);
        os << '\n';
    }
}

std::vector<TreeNode> read_tree(std::istream& is) {
    const std::string header = textio::expect_line(is, "tree node count");
    const auto head = textio::split(header);
    if (head.size() != 2 || head[0] != "nodes") throw ModelError("malformed tree header");
    const auto count = textio::parse_u64(head[1]);
    std::vector<TreeNode> nodes(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto tok = textio::split(textio::expect_line(is, "tree node"));
        if (tok.size() != 6) throw ModelError("malformed tree node");
        TreeNode& n = nodes[i];
        n.feature = static_cast<int>(textio::parse_int(tok[0]));
        n.threshold = textio::parse_double(tok[1]);
        n.left = static_cast<int>(textio::parse_int(tok[2]));
        n.right = static_cast<int>(textio::parse_int(tok[3]));
        n.counts[0] = textio::parse_double(tok[4]);
        n.counts[1] = textio::parse_double(tok[5]);
    }
    return nodes;
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0; // impurity decrease (CART) or gain ratio (C4.5)
    bool valid = false;
};

double gini(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

// Best Gini split of one feature over the index subset; prefers the
// lower threshold on ties.
SplitChoice best_gini_split(const DataMatrix& X, std::span<const int> y,
                            const std::vector<int>& idx, int feature, int min_leaf,
                            std::vector<std::pair<double, int>>& scratch) {
    scratch.clear();
    for (const int i : idx) scratch.emplace_back(X.at(i, feature), y[static_cast<std::size_t>(i)]);
    std::sort(scratch.begin(), scratch.end());

    const int n = static_cast<int>(scratch.size());
    double total1 = 0.0;
    for (const auto& [v, cls] : scratch) total1 += cls;
    const double total0 = n - total1;
    const double parent = gini(total0, total1);

    SplitChoice best;
    double left0 = 0.0, left1 = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        if (scratch[static_cast<std::size_t>(i)].second == 1) left1 += 1.0; else left0 += 1.0;
        if (scratch[static_cast<std::size_t>(i)].first ==
            scratch[static_cast<std::size_t>(i) + 1].first)
            continue;
        const int nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double wl = static_cast<double>(nl) / n;
        const double decrease =
            parent - wl * gini(left0, left1) - (1.0 - wl) * gini(total0 - left0, total1 - left1);
        if (decrease > best.score + 1e-15) {
            best.valid = true;
            best.score = decrease;
            best.feature = feature;
            best.threshold = 0.5 * (scratch[static_cast<std::size_t>(i)].first +
                                    scratch[static_cast<std::size_t>(i) + 1].first);
        }
    }
    return best;
}

struct CartGrower {
    const DataMatrix& X;
    std::span<const int> y;
    int mtry;
    int min_leaf;
    Rng& rng;
    std::vector<TreeNode> nodes;
    std::vector<int> feature_order;
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<int>& idx) {
        const int me = static_cast<int>(nodes.size());
        nodes.emplace_back();
        double c[2] = {0.0, 0.0};
        for (const int i : idx) c[y[static_cast<std::size_t>(i)]] += 1.0;
        nodes[static_cast<std::size_t>(me)].counts[0] = c[0];
        nodes[static_cast<std::size_t>(me)].counts[1] = c[1];

        if (c[0] == 0.0 || c[1] == 0.0 || static_cast<int>(idx.size()) < 2 * min_leaf)
            return me;

        // Random feature order; evaluate the first mtry non-constant
        // candidates so degenerate draws do not force premature leaves.
        feature_order.resize(static_cast<std::size_t>(X.cols));
        std::iota(feature_order.begin(), feature_order.end(), 0);
        rng.shuffle(feature_order);

        SplitChoice best;
        int evaluated = 0;
        for (const int f : feature_order) {
            if (evaluated >= mtry) break;
            const SplitChoice s = best_gini_split(X, y, idx, f, min_leaf, scratch);
            if (!s.valid) continue; // constant feature at this node
            ++evaluated;
            if (!best.valid || s.score > best.score + 1e-15 ||
                (std::abs(s.score - best.score) <= 1e-15 &&
                 (s.feature < best.feature ||
                  (s.feature == best.feature && s.threshold < best.threshold))))
                best = s;
        }
        if (!best.valid) return me;

        std::vector<int> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (const int i : idx) {
            if (X.at(i, best.feature) <= best.threshold) left_idx.push_back(i);
            else right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        nodes[static_cast<std::size_t>(me)].feature = best.feature;
        nodes[static_cast<std::size_t>(me)].threshold = best.threshold;
        const int l = build(left_idx);
        nodes[static_cast<std::size_t>(me)].left = l;
        const int r = build(right_idx);
        nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }
};

} // namespace

std::vector<TreeNode> grow_cart(const DataMatrix& X, std::span<const int> y,
                                std::span<const int> sample_indices, int mtry, int min_leaf,
                                Rng& rng) {
    CartGrower grower{X, y, std::max(1, mtry), std::max(1, min_leaf), rng, {}, {}, {}};
    std::vector<int> idx(sample_indices.begin(), sample_indices.end());
    grower.build(idx);
    return std::move(grower.nodes);
}

std::unique_ptr<ForestModel> ForestModel::fit(const Dataset& dataset, const ForestParams& params,
                                              std::uint64_t seed) {
    const DataMatrix X = to_matrix(dataset);
    const std::vector<int> y = to_class_labels(dataset);
    const int n = X.rows;
    const int mtry = params.mtry > 0
                         ? params.mtry
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols))));

    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(static_cast<std::size_t>(params.trees));
    for (int t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> sample(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            for (int i = 0; i < n; ++i)
                sample[static_cast<std::size_t>(i)] =
                    static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        } else {
            std::iota(sample.begin(), sample.end(), 0);
        }
        trees.push_back(grow_cart(X, y, sample, mtry, params.min_leaf, rng));
    }
    return std::make_unique<ForestModel>(std::move(trees), dataset.schema.hash(), seed, X.cols);
}

Prediction ForestModel::do_predict(std::span<const double> x) const {
    double votes[2] = {0.0, 0.0};
    for (const auto& tree : trees_) votes[tree_predict(tree, x).label] += 1.0;
    const double total = votes[0] + votes[1];
    const double p1 = total > 0.0 ? votes[1] / total : 0.5;
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

void ForestModel::write_params(std::ostream& os) const {
    os << "trees " << trees_.size() << '\n';
    for (const auto& tree : trees_) write_tree(os, tree);
}

std::unique_ptr<ForestModel> ForestModel::read_params(std::istream& is, std::uint64_t schema_hash,
                                                      std::uint64_t seed, int dimension) {
    const auto head = textio::split(textio::expect_line(is, "forest header"));
    if (head.size() != 2 || head[0] != "trees") throw ModelError("malformed forest header");
    const auto count = textio::parse_u64(head[1]);
    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) trees.push_back(read_tree(is));
    return std::make_unique<ForestModel>(std::move(trees), schema_hash, seed, dimension);
}

// ---------------------------------------------------------------------------
// C4.5-style tree: gain-ratio splits, pessimistic pruning.

namespace {

double entropy2(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    if (n0 > 0.0) h -= (n0 / n) * std::log2(n0 / n);
    if (n1 > 0.0) h -= (n1 / n) * std::log2(n1 / n);
    return h;
}

struct GainSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double gain_ratio = 0.0;
    bool valid = false;
};

GainSplit best_gain_split(const DataMatrix& X, std::span<const int> y,
                          const std::vector<int>& idx, int feature, int min_leaf,
                          std::vector<std::pair<double, int>>& scratch) {
    scratch.clear();
    for (const int i : idx) scratch.emplace_back(X.at(i, feature), y[static_cast<std::size_t>(i)]);
    std::sort(scratch.begin(), scratch.end());

    const int n = static_cast<int>(scratch.size());
    double total1 = 0.0;
    for (const auto& [v, cls] : scratch) total1 += cls;
    const double total0 = n - total1;
    const double parent = entropy2(total0, total1);

    GainSplit best;
    double left0 = 0.0, left1 = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        if (scratch[static_cast<std::size_t>(i)].second == 1) left1 += 1.0; else left0 += 1.0;
        if (scratch[static_cast<std::size_t>(i)].first ==
            scratch[static_cast<std::size_t>(i) + 1].first)
            continue;
        const int nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double wl = static_cast<double>(nl) / n;
        const double gain = parent - wl * entropy2(left0, left1) -
                            (1.0 - wl) * entropy2(total0 - left0, total1 - left1);
        if (gain > best.gain + 1e-15) {
            best.valid = true;
            best.gain = gain;
            const double split_info = entropy2(static_cast<double>(nl), static_cast<double>(nr));
            best.gain_ratio = split_info > 0.0 ? gain / split_info : 0.0;
            best.feature = feature;
            best.threshold = 0.5 * (scratch[static_cast<std::size_t>(i)].first +
                                    scratch[static_cast<std::size_t>(i) + 1].first);
        }
    }
    return best;
}

struct C45Grower {
    const DataMatrix& X;
    std::span<const int> y;
    int min_leaf;
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<int>& idx) {
        const int me = static_cast<int>(nodes.size());
        nodes.emplace_back();
        double c[2] = {0.0, 0.0};
        for (const int i : idx) c[y[static_cast<std::size_t>(i)]] += 1.0;
        nodes[static_cast<std::size_t>(me)].counts[0] = c[0];
        nodes[static_cast<std::size_t>(me)].counts[1] = c[1];
        if (c[0] == 0.0 || c[1] == 0.0 || static_cast<int>(idx.size()) < 2 * min_leaf)
            return me;

        // Per C4.5, pick the best gain ratio among attributes whose gain
        // reaches the average gain of the splittable attributes.
        std::vector<GainSplit> candidates;
        double gain_sum = 0.0;
        for (int f = 0; f < X.cols; ++f) {
            const GainSplit s = best_gain_split(X, y, idx, f, min_leaf, scratch);
            if (s.valid) {
                gain_sum += s.gain;
                candidates.push_back(s);
            }
        }
        if (candidates.empty()) return me;
        const double avg_gain = gain_sum / static_cast<double>(candidates.size());

        GainSplit best;
        for (const GainSplit& s : candidates) {
            if (s.gain + 1e-12 < avg_gain) continue;
            if (!best.valid || s.gain_ratio > best.gain_ratio + 1e-15 ||
                (std::abs(s.gain_ratio - best.gain_ratio) <= 1e-15 && s.feature < best.feature))
                best = s;
        }
        if (!best.valid) return me;

        std::vector<int> left_idx, right_idx;
        for (const int i : idx) {
            if (X.at(i, best.feature) <= best.threshold) left_idx.push_back(i);
            else right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        nodes[static_cast<std::size_t>(me)].feature = best.feature;
        nodes[static_cast<std::size_t>(me)].threshold = best.threshold;
        const int l = build(left_idx);
        nodes[static_cast<std::size_t>(me)].left = l;
        const int r = build(right_idx);
        nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }
};

double subtree_pessimistic_errors(const std::vector<TreeNode>& nodes, int idx, double cf) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) {
        const double total = n.counts[0] + n.counts[1];
        if (total <= 0.0) return 0.0;
        const double errors = std::min(n.counts[0], n.counts[1]);
        return errors + pessimistic_added_errors(total, errors, cf);
    }
    return subtree_pessimistic_errors(nodes, n.left, cf) +
           subtree_pessimistic_errors(nodes, n.right, cf);
}

// Bottom-up subtree replacement. Children are pruned first, then the
// node collapses when a leaf would not estimate worse than its subtree.
void prune_node(std::vector<TreeNode>& nodes, int idx, double cf) {
    TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) return;
    prune_node(nodes, n.left, cf);
    prune_node(nodes, n.right, cf);

    const double total = n.counts[0] + n.counts[1];
    const double leaf_errors = std::min(n.counts[0], n.counts[1]);
    const double as_leaf = leaf_errors + pessimistic_added_errors(total, leaf_errors, cf);
    const double as_subtree = subtree_pessimistic_errors(nodes, idx, cf);
    if (as_leaf <= as_subtree + 0.1) {
        n.feature = -1;
        n.left = n.right = -1;
    }
}

// Drops nodes orphaned by pruning and remaps child indices (preorder).
std::vector<TreeNode> compact_tree(const std::vector<TreeNode>& nodes) {
    std::vector<TreeNode> out;
    struct Frame { int old_idx; int parent_out; bool is_left; };
    std::vector<Frame> frames = {{0, -1, false}};
    while (!frames.empty()) {
        const Frame f = frames.back();
        frames.pop_back();
        const int out_idx = static_cast<int>(out.size());
        out.push_back(nodes[static_cast<std::size_t>(f.old_idx)]);
        if (f.parent_out >= 0) {
            if (f.is_left) out[static_cast<std::size_t>(f.parent_out)].left = out_idx;
            else out[static_cast<std::size_t>(f.parent_out)].right = out_idx;
        }
        const TreeNode& n = nodes[static_cast<std::size_t>(f.old_idx)];
        if (!n.is_leaf()) {
            frames.push_back({n.right, out_idx, false}); // left emitted first
            frames.push_back({n.left, out_idx, true});
        } else {
            out.back().left = out.back().right = -1;
        }
    }
    return out;
}

// Standard normal quantile (Acklam's rational approximation), accurate to
// ~1e-9 over (0, 1).
double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double pessimistic_added_errors(double n, double e, double confidence) {
    if (n <= 0.0) return 0.0;
    if (confidence >= 0.5) return 0.0;
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (pessimistic_added_errors(n, 1.0, confidence) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = normal_quantile(1.0 - confidence);
    const double f = (e + 0.5) / n;
    const double z2 = z * z;
    const double r = (f + z2 / (2.0 * n) +
                      z * std::sqrt(f / n - f * f / n + z2 / (4.0 * n * n))) /
                     (1.0 + z2 / n);
    return r * n - e;
}

std::unique_ptr<C45Model> C45Model::fit(const Dataset& dataset, const C45Params& params,
                                        std::uint64_t seed) {
    const DataMatrix X = to_matrix(dataset);
    const std::vector<int> y = to_class_labels(dataset);
    C45Grower grower{X, y, std::max(1, params.min_leaf), {}, {}};
    std::vector<int> idx(static_cast<std::size_t>(X.rows));
    std::iota(idx.begin(), idx.end(), 0);
    grower.build(idx);
    std::vector<TreeNode> nodes = std::move(grower.nodes);
    if (params.prune) {
        prune_node(nodes, 0, params.confidence);
        nodes = compact_tree(nodes);
    }
    return std::make_unique<C45Model>(std::move(nodes), dataset.schema.hash(), seed, X.cols);
}

Prediction C45Model::do_predict(std::span<const double> x) const {
    return tree_predict(nodes_, x);
}

void C45Model::write_params(std::ostream& os) const { write_tree(os, nodes_); }

std::unique_ptr<C45Model> C45Model::read_params(std::istream& is, std::uint64_t schema_hash,
                                                std::uint64_t seed, int dimension) {
    return std::make_unique<C45Model>(read_tree(is), schema_hash, seed, dimension);
}

} // namespace rehabkit
