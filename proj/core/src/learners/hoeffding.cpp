#include "rehabkit/learners/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rehabkit/errors.hpp"
#include "rehabkit/learners/tree.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit {

void GaussianStat::add(double v) {
    weight += 1.0;
    const double delta = v - mean;
    mean += delta / weight;
    m2 += delta * (v - mean);
    min = std::min(min, v);
    max = std::max(max, v);
}

double GaussianStat::stddev() const {
    return weight > 0.0 ? std::sqrt(m2 / weight) : 0.0;
}

double GaussianStat::fraction_below(double t) const {
    if (weight <= 0.0) return 0.0;
    const double sd = stddev();
    if (sd <= 0.0) return mean <= t ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(t - mean) / (sd * 1.4142135623730951));
}

namespace {

double entropy2(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    if (n0 > 0.0) h -= (n0 / n) * std::log2(n0 / n);
    if (n1 > 0.0) h -= (n1 / n) * std::log2(n1 / n);
    return h;
}

struct AttrMerit {
    double gain = -1.0;
    double threshold = 0.0;
    double left_mass[2] = {0.0, 0.0};
};

// Best information gain over evenly spaced candidate thresholds, with
// class masses on each side estimated from the per-class Gaussians.
AttrMerit evaluate_attribute(const std::array<GaussianStat, 2>& stats, int candidates) {
    AttrMerit best;
    const double w0 = stats[0].weight, w1 = stats[1].weight;
    const double total = w0 + w1;
    if (total <= 0.0) return best;
    double lo = std::min(stats[0].min, stats[1].min);
    double hi = std::max(stats[0].max, stats[1].max);
    if (!(hi > lo)) return best; // constant attribute
    const double parent = entropy2(w0, w1);

    for (int i = 1; i <= candidates; ++i) {
        const double t = lo + (hi - lo) * i / (candidates + 1);
        const double l0 = w0 * stats[0].fraction_below(t);
        const double l1 = w1 * stats[1].fraction_below(t);
        const double r0 = w0 - l0, r1 = w1 - l1;
        const double wl = (l0 + l1) / total;
        const double gain = parent - wl * entropy2(l0, l1) - (1.0 - wl) * entropy2(r0, r1);
        if (gain > best.gain + 1e-15) {
            best.gain = gain;
            best.threshold = t;
            best.left_mass[0] = l0;
            best.left_mass[1] = l1;
        }
    }
    return best;
}

} // namespace

HoeffdingTree::HoeffdingTree(const HoeffdingParams& params, std::uint64_t schema_hash,
                             std::uint64_t seed, int dimension)
    : Model(Algorithm::hoeffding, schema_hash, seed, dimension), params_(params) {
    HoeffdingNode root;
    root.attr_stats.resize(static_cast<std::size_t>(dimension));
    nodes_.push_back(std::move(root));
}

int HoeffdingTree::route(std::span<const double> x) const {
    int idx = 0;
    while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
        const HoeffdingNode& n = nodes_[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return idx;
}

void HoeffdingTree::update(std::span<const double> x, int cls) {
    if (static_cast<int>(x.size()) != dimension())
        throw ModelError("hoeffding update: schema mismatch");
    const int leaf = route(x);
    HoeffdingNode& n = nodes_[static_cast<std::size_t>(leaf)];
    n.class_counts[cls] += 1.0;
    for (int j = 0; j < dimension(); ++j)
        n.attr_stats[static_cast<std::size_t>(j)][static_cast<std::size_t>(cls)].add(
            x[static_cast<std::size_t>(j)]);

    const double weight = n.class_counts[0] + n.class_counts[1];
    if (weight - n.weight_at_last_attempt >= params_.grace_period) {
        nodes_[static_cast<std::size_t>(leaf)].weight_at_last_attempt = weight;
        try_split(leaf);
    }
}

void HoeffdingTree::try_split(int leaf) {
    HoeffdingNode& n = nodes_[static_cast<std::size_t>(leaf)];
    if (n.class_counts[0] <= 0.0 || n.class_counts[1] <= 0.0) return; // pure leaf

    AttrMerit best, second;
    int best_attr = -1;
    for (int j = 0; j < dimension(); ++j) {
        const AttrMerit m =
            evaluate_attribute(n.attr_stats[static_cast<std::size_t>(j)], params_.split_candidates);
        if (m.gain > best.gain) {
            second = best;
            best = m;
            best_attr = j;
        } else if (m.gain > second.gain) {
            second = m;
        }
    }
    if (best_attr < 0 || best.gain <= 0.0) return;

    const double weight = n.class_counts[0] + n.class_counts[1];
    // Binary entropy has range log2(2) = 1.
    const double eps = hoeffding_bound(1.0, params_.delta, static_cast<std::uint64_t>(weight));
    const double second_gain = std::max(second.gain, 0.0);
    if (!(best.gain - second_gain > eps || eps < params_.tau)) return;

    HoeffdingNode left, right;
    left.attr_stats.resize(static_cast<std::size_t>(dimension()));
    right.attr_stats.resize(static_cast<std::size_t>(dimension()));
    // Children start from the Gaussian-estimated side masses so fresh
    // leaves predict sensibly before new data arrives.
    left.class_counts[0] = best.left_mass[0];
    left.class_counts[1] = best.left_mass[1];
    right.class_counts[0] = std::max(n.class_counts[0] - best.left_mass[0], 0.0);
    right.class_counts[1] = std::max(n.class_counts[1] - best.left_mass[1], 0.0);

    const int li = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(left));
    const int ri = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(right));

    HoeffdingNode& parent = nodes_[static_cast<std::size_t>(leaf)];
    parent.feature = best_attr;
    parent.threshold = best.threshold;
    parent.left = li;
    parent.right = ri;
    parent.attr_stats.clear();
    parent.attr_stats.shrink_to_fit();
}

Prediction HoeffdingTree::do_predict(std::span<const double> x) const {
    const HoeffdingNode& n = nodes_[static_cast<std::size_t>(route(x))];
    const double total = n.class_counts[0] + n.class_counts[1];
    const double p1 = total > 0.0 ? n.class_counts[1] / total : 0.5;
    const int label = p1 >= 0.5 ? 1 : 0;
    return {label, label ? p1 : 1.0 - p1};
}

std::size_t HoeffdingTree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_) c += n.is_leaf() ? 1 : 0;
    return c;
}

std::unique_ptr<HoeffdingTree> HoeffdingTree::fit(const Dataset& dataset,
                                                  const HoeffdingParams& params,
                                                  std::uint64_t seed) {
    const std::vector<int> y = to_class_labels(dataset);
    auto tree = std::make_unique<HoeffdingTree>(params, dataset.schema.hash(), seed,
                                                static_cast<int>(dataset.schema.size()));
    for (std::size_t i = 0; i < dataset.rows.size(); ++i)
        tree->update(dataset.rows[i].values, y[i]);
    return tree;
}

void HoeffdingTree::write_params(std::ostream& os) const {
    os << "hoeffding ";
    textio::write_double(os, params_.delta);
    os << ' ';
    textio::write_double(os, params_.tau);
    os << ' ' << params_.grace_period << ' ' << params_.split_candidates << '\n';
    os << "nodes " << nodes_.size() << '\n';
    for (const HoeffdingNode& n : nodes_) {
        os << n.feature << ' ';
        textio::write_double(os, n.threshold);
        os << ' ' << n.left << ' ' << n.right << ' ';
        textio::write_double(os, n.class_counts[0]);
        os << ' ';
        textio::write_double(os, n.class_counts[1]);
        os << ' ';
        textio::write_double(os, n.weight_at_last_attempt);
        os << ' ' << (n.attr_stats.empty() ? 0 : 1) << '\n';
        for (const auto& per_class : n.attr_stats) {
            bool first = true;
            for (const GaussianStat& g : per_class) {
                if (!first) os << ' ';
                first = false;
                textio::write_double(os, g.weight);
                os << ' ';
                textio::write_double(os, g.mean);
                os << ' ';
                textio::write_double(os, g.m2);
                os << ' ';
                textio::write_double(os, g.min);
                os << ' ';
                textio::write_double(os, g.max);
            }
            os << '\n';
        }
    }
}

std::unique_ptr<HoeffdingTree> HoeffdingTree::read_params(std::istream& is,
                                                          std::uint64_t schema_hash,
                                                          std::uint64_t seed, int dimension) {
    const auto ptok = textio::split(textio::expect_line(is, "hoeffding params"));
    if (ptok.size() != 5 || ptok[0] != "hoeffding")
        throw ModelError("malformed hoeffding params");
    HoeffdingParams params;
    params.delta = textio::parse_double(ptok[1]);
    params.tau = textio::parse_double(ptok[2]);
    params.grace_period = static_cast<int>(textio::parse_int(ptok[3]));
    params.split_candidates = static_cast<int>(textio::parse_int(ptok[4]));

    auto tree = std::make_unique<HoeffdingTree>(params, schema_hash, seed, dimension);
    tree->nodes_.clear();

    const auto head = textio::split(textio::expect_line(is, "hoeffding node count"));
    if (head.size() != 2 || head[0] != "nodes") throw ModelError("malformed hoeffding header");
    const auto count = textio::parse_u64(head[1]);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto tok = textio::split(textio::expect_line(is, "hoeffding node"));
        if (tok.size() != 8) throw ModelError("malformed hoeffding node");
        HoeffdingNode n;
        n.feature = static_cast<int>(textio::parse_int(tok[0]));
        n.threshold = textio::parse_double(tok[1]);
        n.left = static_cast<int>(textio::parse_int(tok[2]));
        n.right = static_cast<int>(textio::parse_int(tok[3]));
        n.class_counts[0] = textio::parse_double(tok[4]);
        n.class_counts[1] = textio::parse_double(tok[5]);
        n.weight_at_last_attempt = textio::parse_double(tok[6]);
        const bool has_stats = textio::parse_int(tok[7]) != 0;
        if (has_stats) {
            n.attr_stats.resize(static_cast<std::size_t>(dimension));
            for (int j = 0; j < dimension; ++j) {
                const auto st = textio::split(textio::expect_line(is, "hoeffding stats"));
                if (st.size() != 10) throw ModelError("malformed hoeffding stats");
                for (int cls = 0; cls < 2; ++cls) {
                    GaussianStat& g =
                        n.attr_stats[static_cast<std::size_t>(j)][static_cast<std::size_t>(cls)];
                    g.weight = textio::parse_double(st[static_cast<std::size_t>(cls * 5 + 0)]);
                    g.mean = textio::parse_double(st[static_cast<std::size_t>(cls * 5 + 1)]);
                    g.m2 = textio::parse_double(st[static_cast<std::size_t>(cls * 5 + 2)]);
                    g.min = textio::parse_double(st[static_cast<std::size_t>(cls * 5 + 3)]);
                    g.max = textio::parse_double(st[static_cast<std::size_t>(cls * 5 + 4)]);
                }
            }
        }
        tree->nodes_.push_back(std::move(n));
    }
    if (tree->nodes_.empty()) throw ModelError("hoeffding model has no nodes");
    return tree;
}

} // namespace rehabkit
