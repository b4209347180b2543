#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace lolguard {

// Feed-forward network with rectified-linear hidden layers and one logistic
// output unit, trained with mini-batch gradient descent on cross-entropy.
class MlpModel {
public:
    MlpModel() = default;

    static MlpModel train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<int>& hidden_sizes, double learning_rate,
                          int epochs, int batch_size, std::uint64_t seed);

    Eigen::Index input_dim() const { return weights_.empty() ? 0 : weights_.front().cols(); }

    // Malicious-class probability per row of X.
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    void save(std::ostream& out) const;
    static MlpModel load(std::istream& in);

private:
    // weights_[l] is (units_l x units_{l-1}); the last layer has one row.
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

} // namespace lolguard
