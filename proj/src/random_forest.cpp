#include "lolguard/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "lolguard/errors.hpp"
#include "lolguard/rng.hpp"
#include "lolguard/serialize_util.hpp"

namespace lolguard {

namespace {

constexpr int kDefaultDepthCap = 64;
constexpr int kMinSplitSize = 2;

double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
}

} // namespace

RandomForestModel::Tree RandomForestModel::grow_tree(const Eigen::MatrixXd& X,
                                                     const Eigen::VectorXd& y,
                                                     const std::vector<int>& rows, int max_depth,
                                                     int mtry, std::mt19937_64& rng) {
    Tree tree;

    struct Work {
        std::vector<int> rows;
        int depth;
        int node_index;
    };

    auto make_node = [&tree]() {
        tree.push_back(Node{});
        return static_cast<int>(tree.size() - 1);
    };

    std::vector<Work> stack;
    stack.push_back({rows, 0, make_node()});

    std::vector<int> features(static_cast<std::size_t>(X.cols()));
    for (std::size_t f = 0; f < features.size(); ++f) features[f] = static_cast<int>(f);

    while (!stack.empty()) {
        Work work = std::move(stack.back());
        stack.pop_back();

        double pos = 0.0;
        for (int r : work.rows) pos += y(r);
        const auto total = static_cast<double>(work.rows.size());

        Node& node = tree[static_cast<std::size_t>(work.node_index)];
        node.leaf_value = pos / total;

        if (pos == 0.0 || pos == total || work.depth >= max_depth ||
            work.rows.size() < static_cast<std::size_t>(kMinSplitSize))
            continue; // stays a leaf

        // mtry features without replacement (partial Fisher-Yates).
        for (int t = 0; t < mtry; ++t) {
            const std::size_t j = t + rand_below(rng, features.size() - static_cast<std::size_t>(t));
            std::swap(features[static_cast<std::size_t>(t)], features[j]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = gini(pos, total);
        std::vector<std::pair<double, double>> values; // (x, y) sorted by x
        values.reserve(work.rows.size());

        for (int t = 0; t < mtry; ++t) {
            const int f = features[static_cast<std::size_t>(t)];
            values.clear();
            for (int r : work.rows) values.emplace_back(X(r, f), y(r));
            std::sort(values.begin(), values.end());

            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                left_pos += values[i].second;
                if (values[i].first == values[i + 1].first) continue;
                const auto left_n = static_cast<double>(i + 1);
                const double right_n = total - left_n;
                const double weighted = (left_n / total) * gini(left_pos, left_n) +
                                        (right_n / total) * gini(pos - left_pos, right_n);
                if (weighted + 1e-12 < best_impurity) {
                    best_impurity = weighted;
                    best_feature = f;
                    best_threshold = values[i].first +
                                     0.5 * (values[i + 1].first - values[i].first);
                }
            }
        }

        if (best_feature < 0) continue; // no informative split among the sampled features

        std::vector<int> left_rows;
        std::vector<int> right_rows;
        for (int r : work.rows)
            (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) continue;

        const int left = make_node();
        const int right = make_node();
        Node& parent = tree[static_cast<std::size_t>(work.node_index)]; // make_node may reallocate
        parent.feature = best_feature;
        parent.threshold = best_threshold;
        parent.left = left;
        parent.right = right;

        stack.push_back({std::move(right_rows), work.depth + 1, right});
        stack.push_back({std::move(left_rows), work.depth + 1, left});
    }
    return tree;
}

double RandomForestModel::tree_vote(const Tree& tree, const Eigen::RowVectorXd& x) {
    std::size_t node = 0;
    while (tree[node].feature >= 0)
        node = static_cast<std::size_t>(x(tree[node].feature) <= tree[node].threshold
                                            ? tree[node].left
                                            : tree[node].right);
    return tree[node].leaf_value >= 0.5 ? 1.0 : 0.0;
}

RandomForestModel RandomForestModel::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           int tree_count, std::optional<int> max_depth,
                                           std::uint64_t seed) {
    if (X.rows() == 0) throw EmptyTrainingError("random forest: no training rows");
    if (X.rows() != y.size())
        throw LengthMismatchError("random forest: row/label count mismatch");
    if (tree_count < 1) throw std::invalid_argument("random forest: tree_count must be >= 1");

    RandomForestModel model;
    model.input_dim_ = X.cols();
    const int depth_cap = max_depth.value_or(kDefaultDepthCap);
    const int mtry = std::max(
        1, std::min<int>(static_cast<int>(X.cols()),
                         static_cast<int>(std::lround(std::sqrt(static_cast<double>(X.cols()))))));
    const auto n = static_cast<std::size_t>(X.rows());

    model.trees_.reserve(static_cast<std::size_t>(tree_count));
    for (int t = 0; t < tree_count; ++t) {
        std::mt19937_64 rng(mix_seed(seed, "rf.tree." + std::to_string(t)));
        std::vector<int> rows(n);
        for (std::size_t i = 0; i < n; ++i)
            rows[i] = static_cast<int>(rand_below(rng, n)); // bootstrap
        model.trees_.push_back(grow_tree(X, y, rows, depth_cap, mtry, rng));
    }
    return model;
}

Eigen::VectorXd RandomForestModel::predict(const Eigen::MatrixXd& X) const {
    if (trees_.empty()) throw Error("random forest: model is untrained");
    if (X.cols() != input_dim_)
        throw DimensionMismatchError("random forest: expected " + std::to_string(input_dim_) +
                                     " features, got " + std::to_string(X.cols()));

    Eigen::VectorXd scores(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        double votes = 0.0;
        for (const Tree& tree : trees_) votes += tree_vote(tree, X.row(r));
        scores(r) = votes / static_cast<double>(trees_.size());
    }
    return scores;
}

void RandomForestModel::save(std::ostream& out) const {
    out << "input_dim " << input_dim_ << '\n';
    out << "trees " << trees_.size() << '\n';
    for (const Tree& tree : trees_) {
        out << "tree " << tree.size() << '\n';
        for (const Node& node : tree) {
            if (node.feature < 0) {
                out << "leaf ";
                detail::write_double(out, node.leaf_value);
                out << '\n';
            } else {
                out << "split " << node.feature << ' ';
                detail::write_double(out, node.threshold);
                out << ' ' << node.left << ' ' << node.right << '\n';
            }
        }
    }
}

RandomForestModel RandomForestModel::load(std::istream& in) {
    RandomForestModel model;
    model.input_dim_ =
        static_cast<Eigen::Index>(detail::expect_sized_header(in, "input_dim"));
    const std::size_t n_trees = detail::expect_sized_header(in, "trees");
    model.trees_.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        const std::size_t n_nodes = detail::expect_sized_header(in, "tree");
        Tree tree;
        tree.reserve(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::string tag;
            if (!(in >> tag)) throw FormatError("model: truncated tree");
            Node node;
            if (tag == "leaf") {
                node.leaf_value = detail::read_double(in);
            } else if (tag == "split") {
                if (!(in >> node.feature)) throw FormatError("model: bad split node");
                node.threshold = detail::read_double(in);
                if (!(in >> node.left >> node.right)) throw FormatError("model: bad split node");
                if (node.feature < 0 || node.feature >= model.input_dim_)
                    throw FormatError("model: split feature out of range");
            } else {
                throw FormatError("model: unknown node tag: " + tag);
            }
            tree.push_back(node);
        }
        for (const Node& node : tree)
            if (node.feature >= 0 &&
                (node.left < 0 || node.right < 0 ||
                 node.left >= static_cast<int>(tree.size()) ||
                 node.right >= static_cast<int>(tree.size())))
                throw FormatError("model: split child index out of range");
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

} // namespace lolguard
