#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace lolguard {

// Random forest of CART trees: Gini impurity, bootstrap row sampling and
// sqrt(F) feature subsampling per split. The score for a row is the fraction
// of trees voting malicious.
class RandomForestModel {
public:
    RandomForestModel() = default;

    static RandomForestModel train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   int tree_count, std::optional<int> max_depth,
                                   std::uint64_t seed);

    Eigen::Index input_dim() const { return input_dim_; }

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    void save(std::ostream& out) const;
    static RandomForestModel load(std::istream& in);

private:
    struct Node {
        int feature = -1;        // -1 marks a leaf
        double threshold = 0.0;  // go left when x[feature] <= threshold
        int left = -1;
        int right = -1;
        double leaf_value = 0.0; // malicious fraction at the leaf
    };
    using Tree = std::vector<Node>;

    static Tree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<int>& rows, int max_depth, int mtry,
                          std::mt19937_64& rng);
    static double tree_vote(const Tree& tree, const Eigen::RowVectorXd& x);

    std::vector<Tree> trees_;
    Eigen::Index input_dim_ = 0;
};

} // namespace lolguard
