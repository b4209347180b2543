#include "lolguard/classifier.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "lolguard/errors.hpp"
#include "lolguard/serialize_util.hpp"

namespace lolguard {

const std::string& classifier_kind_name(ClassifierKind kind) {
    static const std::string mlp = "mlp";
    static const std::string rf = "rf";
    return kind == ClassifierKind::Mlp ? mlp : rf;
}

ClassifierKind parse_classifier_kind(std::string_view name) {
    if (name == "mlp") return ClassifierKind::Mlp;
    if (name == "rf") return ClassifierKind::RandomForest;
    throw FormatError("unknown classifier kind: " + std::string(name));
}

const std::string& aggregation_name(AggregationMode mode) {
    static const std::string max = "max";
    static const std::string min = "min";
    static const std::string avg = "avg";
    switch (mode) {
    case AggregationMode::Max: return max;
    case AggregationMode::Min: return min;
    case AggregationMode::Avg: return avg;
    }
    return max;
}

AggregationMode parse_aggregation(std::string_view name) {
    if (name == "max") return AggregationMode::Max;
    if (name == "min") return AggregationMode::Min;
    if (name == "avg") return AggregationMode::Avg;
    throw FormatError("unknown aggregation mode: " + std::string(name));
}

ClassifierKind select_classifier_kind(std::size_t train_vector_count, std::size_t threshold) {
    return train_vector_count >= threshold ? ClassifierKind::Mlp : ClassifierKind::RandomForest;
}

TokenClassifier TokenClassifier::train(ClassifierKind kind, const Eigen::MatrixXd& X,
                                       const std::vector<Label>& y, const Hyperparams& hyper,
                                       std::string binary) {
    if (X.rows() == 0) throw EmptyTrainingError("no training rows for " + binary);
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw LengthMismatchError("row/label count mismatch for " + binary);

    Eigen::VectorXd targets(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        targets(i) = y[static_cast<std::size_t>(i)] == Label::Malicious ? 1.0 : 0.0;

    TokenClassifier out;
    out.binary_ = std::move(binary);
    out.input_dim_ = X.cols();
    out.hyper_ = hyper;
    if (kind == ClassifierKind::Mlp) {
        out.model_ = MlpModel::train(X, targets, hyper.mlp_hidden_sizes, hyper.mlp_learning_rate,
                                     hyper.mlp_epochs, hyper.mlp_batch_size, hyper.seed);
    } else {
        out.model_ =
            RandomForestModel::train(X, targets, hyper.rf_tree_count, hyper.rf_max_depth, hyper.seed);
    }
    return out;
}

ClassifierKind TokenClassifier::kind() const {
    return std::holds_alternative<MlpModel>(model_) ? ClassifierKind::Mlp
                                                    : ClassifierKind::RandomForest;
}

Eigen::VectorXd TokenClassifier::predict_token_scores(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim_)
        throw DimensionMismatchError("classifier for " + binary_ + " expects " +
                                     std::to_string(input_dim_) + " features, got " +
                                     std::to_string(X.cols()));
    if (X.rows() == 0) return Eigen::VectorXd(0);
    return std::visit([&X](const auto& m) { return m.predict(X); }, model_);
}

void TokenClassifier::save(std::ostream& out) const {
    out << "lolguard-model 1\n";
    out << "binary " << binary_ << '\n';
    out << "kind " << classifier_kind_name(kind()) << '\n';
    out << "dim " << input_dim_ << '\n';
    out << "hyper hidden " << hyper_.mlp_hidden_sizes.size();
    for (int h : hyper_.mlp_hidden_sizes) out << ' ' << h;
    out << " lr ";
    detail::write_double(out, hyper_.mlp_learning_rate);
    out << " epochs " << hyper_.mlp_epochs << " batch " << hyper_.mlp_batch_size << " trees "
        << hyper_.rf_tree_count << " depth "
        << (hyper_.rf_max_depth ? std::to_string(*hyper_.rf_max_depth) : "-") << " smote_k "
        << hyper_.smote_k << " threshold " << hyper_.sample_threshold << " seed " << hyper_.seed
        << '\n';
    std::visit([&out](const auto& m) { m.save(out); }, model_);
}

namespace {

Hyperparams read_hyper_line(std::istream& in) {
    Hyperparams hyper;
    std::string tag;
    std::string subtag;
    std::size_t hidden_count = 0;
    if (!(in >> tag >> subtag >> hidden_count) || tag != "hyper" || subtag != "hidden")
        throw FormatError("model: malformed hyperparameter record");
    hyper.mlp_hidden_sizes.clear();
    for (std::size_t i = 0; i < hidden_count; ++i) {
        int h = 0;
        if (!(in >> h) || h < 1) throw FormatError("model: bad hidden layer size");
        hyper.mlp_hidden_sizes.push_back(h);
    }
    if (!(in >> tag) || tag != "lr") throw FormatError("model: missing learning rate");
    hyper.mlp_learning_rate = detail::read_double(in);
    std::string depth;
    if (!(in >> tag >> hyper.mlp_epochs) || tag != "epochs" ||
        !(in >> tag >> hyper.mlp_batch_size) || tag != "batch" ||
        !(in >> tag >> hyper.rf_tree_count) || tag != "trees" || !(in >> tag >> depth) ||
        tag != "depth" || !(in >> tag >> hyper.smote_k) || tag != "smote_k" ||
        !(in >> tag >> hyper.sample_threshold) || tag != "threshold" ||
        !(in >> tag >> hyper.seed) || tag != "seed")
        throw FormatError("model: malformed hyperparameter record");
    if (depth != "-") {
        try {
            hyper.rf_max_depth = std::stoi(depth);
        } catch (const std::exception&) {
            throw FormatError("model: bad depth value: " + depth);
        }
    }
    return hyper;
}

} // namespace

TokenClassifier TokenClassifier::load(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "lolguard-model")
        throw FormatError("model: bad magic header");
    if (version != 1) throw FormatError("model: unsupported version " + std::to_string(version));

    TokenClassifier out;
    std::string tag;
    if (!(in >> tag >> out.binary_) || tag != "binary")
        throw FormatError("model: missing binary name");
    std::string kind_name;
    if (!(in >> tag >> kind_name) || tag != "kind") throw FormatError("model: missing kind");
    long long dim = 0;
    if (!(in >> tag >> dim) || tag != "dim" || dim <= 0)
        throw FormatError("model: missing input dimension");
    out.input_dim_ = static_cast<Eigen::Index>(dim);
    out.hyper_ = read_hyper_line(in);

    if (parse_classifier_kind(kind_name) == ClassifierKind::Mlp) {
        MlpModel m = MlpModel::load(in);
        if (m.input_dim() != out.input_dim_)
            throw FormatError("model: layer shape disagrees with declared dimension");
        out.model_ = std::move(m);
    } else {
        RandomForestModel m = RandomForestModel::load(in);
        if (m.input_dim() != out.input_dim_)
            throw FormatError("model: tree data disagrees with declared dimension");
        out.model_ = std::move(m);
    }
    return out;
}

Eigen::VectorXd predict_token_scores(const TokenClassifier& clf, const Eigen::MatrixXd& X) {
    return clf.predict_token_scores(X);
}

double aggregate(const Eigen::VectorXd& scores, AggregationMode mode) {
    if (scores.size() == 0)
        throw EmptyScoresError("cannot pool an empty score sequence");
    switch (mode) {
    case AggregationMode::Max: return scores.maxCoeff();
    case AggregationMode::Min: return scores.minCoeff();
    case AggregationMode::Avg: return scores.mean();
    }
    return scores.maxCoeff();
}

Label classify(double command_score, double threshold) {
    return command_score >= threshold ? Label::Malicious : Label::Benign;
}

Metrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth) {
    if (predicted.size() != truth.size())
        throw LengthMismatchError("predicted/truth length mismatch");
    if (predicted.empty()) throw EmptyScoresError("cannot compute metrics on empty input");

    Metrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool pred_mal = predicted[i] == Label::Malicious;
        const bool true_mal = truth[i] == Label::Malicious;
        if (pred_mal && true_mal) ++m.confusion.tp;
        else if (pred_mal && !true_mal) ++m.confusion.fp;
        else if (!pred_mal && true_mal) ++m.confusion.fn;
        else ++m.confusion.tn;
    }

    const auto& c = m.confusion;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                                    : 0.0;
    m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                                 : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

} // namespace lolguard
