#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lolguard/mlp.hpp"
#include "lolguard/random_forest.hpp"
#include "lolguard/vocabulary.hpp"

namespace lolguard {

enum class ClassifierKind { Mlp, RandomForest };

const std::string& classifier_kind_name(ClassifierKind kind); // "mlp" / "rf"
ClassifierKind parse_classifier_kind(std::string_view name);

struct Hyperparams {
    std::vector<int> mlp_hidden_sizes{64};
    double mlp_learning_rate = 0.1;
    int mlp_epochs = 80;
    int mlp_batch_size = 32;
    int rf_tree_count = 100;
    std::optional<int> rf_max_depth;
    int smote_k = 5;
    int sample_threshold = 500;
    std::uint64_t seed = 0;
};

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionCounts confusion;
};

enum class AggregationMode { Max, Min, Avg };

const std::string& aggregation_name(AggregationMode mode);
AggregationMode parse_aggregation(std::string_view name);

// MLP when the pre-SMOTE training vector count reaches the threshold,
// Random Forest below it.
ClassifierKind select_classifier_kind(std::size_t train_vector_count,
                                      std::size_t threshold = 500);

// Per-binary trained model scoring token vectors in [0,1].
class TokenClassifier {
public:
    TokenClassifier() = default;

    // Rows are token vectors, one label per row. Single-class input is
    // permitted and degenerates to near-constant output.
    static TokenClassifier train(ClassifierKind kind, const Eigen::MatrixXd& X,
                                 const std::vector<Label>& y, const Hyperparams& hyper,
                                 std::string binary);

    ClassifierKind kind() const;
    Eigen::Index input_dim() const { return input_dim_; }
    const std::string& binary() const { return binary_; }
    const Hyperparams& hyper() const { return hyper_; }

    Eigen::VectorXd predict_token_scores(const Eigen::MatrixXd& X) const;

    void save(std::ostream& out) const;
    static TokenClassifier load(std::istream& in);

private:
    std::variant<MlpModel, RandomForestModel> model_;
    std::string binary_;
    Eigen::Index input_dim_ = 0;
    Hyperparams hyper_;
};

Eigen::VectorXd predict_token_scores(const TokenClassifier& clf, const Eigen::MatrixXd& X);

// Pools token scores into one command score. Throws EmptyScoresError on an
// empty input; empty-token commands are handled upstream.
double aggregate(const Eigen::VectorXd& scores, AggregationMode mode = AggregationMode::Max);

// Malicious iff score >= threshold (boundary inclusive).
Label classify(double command_score, double threshold = 0.5);

// Confusion-matrix metrics with malicious as the positive class;
// precision/recall fall back to 0 on an empty denominator.
Metrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth);

} // namespace lolguard
