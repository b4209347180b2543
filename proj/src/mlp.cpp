#include "lolguard/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lolguard/errors.hpp"
#include "lolguard/rng.hpp"
#include "lolguard/serialize_util.hpp"

namespace lolguard {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

MlpModel MlpModel::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<int>& hidden_sizes, double learning_rate,
                         int epochs, int batch_size, std::uint64_t seed) {
    if (X.rows() == 0) throw EmptyTrainingError("mlp: no training rows");
    if (X.rows() != y.size()) throw LengthMismatchError("mlp: row/label count mismatch");
    if (batch_size < 1) throw std::invalid_argument("mlp: batch_size must be >= 1");

    std::vector<Eigen::Index> sizes;
    sizes.push_back(X.cols());
    for (int h : hidden_sizes) {
        if (h < 1) throw std::invalid_argument("mlp: hidden layer sizes must be positive");
        sizes.push_back(h);
    }
    sizes.push_back(1);

    MlpModel model;
    std::mt19937_64 rng(mix_seed(seed, "mlp.init"));
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        const Eigen::Index fan_in = sizes[l - 1];
        const Eigen::Index fan_out = sizes[l];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd W(fan_out, fan_in);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = rand_range(rng, -limit, limit);
        model.weights_.push_back(std::move(W));
        model.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
    }

    const auto n = static_cast<std::size_t>(X.rows());
    const std::size_t n_layers = model.weights_.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::mt19937_64 shuffle_rng(mix_seed(seed, "mlp.shuffle"));
    std::vector<Eigen::MatrixXd> activations(n_layers + 1); // column-per-sample
    std::vector<Eigen::MatrixXd> pre(n_layers);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        deterministic_shuffle(order, shuffle_rng);
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
            const auto b =
                static_cast<Eigen::Index>(std::min<std::size_t>(batch_size, n - start));

            Eigen::MatrixXd Xb(X.cols(), b);
            Eigen::RowVectorXd yb(b);
            for (Eigen::Index c = 0; c < b; ++c) {
                const std::size_t row = order[start + static_cast<std::size_t>(c)];
                Xb.col(c) = X.row(static_cast<Eigen::Index>(row)).transpose();
                yb(c) = y(static_cast<Eigen::Index>(row));
            }

            activations[0] = std::move(Xb);
            for (std::size_t l = 0; l < n_layers; ++l) {
                pre[l] = (model.weights_[l] * activations[l]).colwise() + model.biases_[l];
                if (l + 1 < n_layers)
                    activations[l + 1] = pre[l].cwiseMax(0.0);
                else
                    activations[l + 1] =
                        pre[l].unaryExpr([](double z) { return sigmoid(z); });
            }

            // Cross-entropy with a logistic output: delta = a - y.
            Eigen::MatrixXd delta =
                (activations[n_layers].row(0) - yb) / static_cast<double>(b);
            for (std::size_t l = n_layers; l-- > 0;) {
                const Eigen::MatrixXd grad_w = delta * activations[l].transpose();
                const Eigen::VectorXd grad_b = delta.rowwise().sum();
                if (l > 0) {
                    Eigen::MatrixXd back = model.weights_[l].transpose() * delta;
                    delta = back.cwiseProduct(
                        pre[l - 1].unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; }));
                }
                model.weights_[l] -= learning_rate * grad_w;
                model.biases_[l] -= learning_rate * grad_b;
            }
        }
    }
    return model;
}

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const {
    if (weights_.empty()) throw Error("mlp: model is untrained");
    if (X.cols() != input_dim())
        throw DimensionMismatchError("mlp: expected " + std::to_string(input_dim()) +
                                     " features, got " + std::to_string(X.cols()));

    Eigen::MatrixXd a = X.transpose();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
        if (l + 1 < weights_.size())
            a = z.cwiseMax(0.0);
        else
            a = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return a.row(0).transpose();
}

void MlpModel::save(std::ostream& out) const {
    out << "layers " << weights_.size() << '\n';
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out << "layer " << l << ' ' << weights_[l].rows() << ' ' << weights_[l].cols() << '\n';
        detail::write_matrix(out, weights_[l]);
        detail::write_vector(out, biases_[l]);
    }
}

MlpModel MlpModel::load(std::istream& in) {
    MlpModel model;
    std::size_t n_layers = detail::expect_sized_header(in, "layers");
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::string tag;
        std::size_t index = 0;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        if (!(in >> tag >> index >> rows >> cols) || tag != "layer" || index != l)
            throw FormatError("mlp: malformed layer header");
        model.weights_.push_back(detail::read_matrix(in, rows, cols));
        model.biases_.push_back(detail::read_vector(in, rows));
    }
    return model;
}

} // namespace lolguard
