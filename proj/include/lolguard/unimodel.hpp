#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "lolguard/classifier.hpp"
#include "lolguard/dataset.hpp"
#include "lolguard/lexer.hpp"
#include "lolguard/vocabulary.hpp"

namespace lolguard {

struct WhitelistRule {
    enum class Kind { Exact, Regex } kind = Kind::Exact;
    std::string pattern;

    // "exact:..." or "regex:..."
    static WhitelistRule parse(const std::string& line);
    std::string serialize() const;
    bool matches(const std::string& command_line) const;
};

struct ModelMeta {
    std::string trained_at; // caller-provided stamp; empty keeps artifacts reproducible
    std::size_t benign_samples = 0;
    std::size_t malicious_samples = 0;
    std::size_t train_vectors = 0; // pre-SMOTE training rows
    std::size_t test_samples = 0;
    std::optional<Metrics> metrics; // absent when there was no test split
};

struct Prediction {
    std::string binary;
    std::string command_line;
    TokenizedCommand tokens;
    Eigen::VectorXd token_scores;
    double command_score = 0.0;
    Label label = Label::Benign;
    bool suppressed = false;
};

struct TrainReport {
    std::string binary;
    ClassifierKind kind = ClassifierKind::RandomForest;
    ModelMeta meta;
};

// First raw token matched against (optional path)(name)(optional .exe),
// case-insensitively. Throws UnsupportedBinaryError when the name is not in
// the registry.
std::string extract_binary(const std::string& command_line, const LexerRegistry& registry);

// Container routing a raw command to its binary-specific vocabulary and
// classifier behind one predict interface. Immutable once trained/loaded;
// concurrent predict calls are safe.
class Unimodel {
public:
    static constexpr int kManifestVersion = 1;

    explicit Unimodel(LexerRegistry registry = LexerRegistry(), int window = 2,
                      AggregationMode aggregation = AggregationMode::Max,
                      double threshold = 0.5);

    const LexerRegistry& registry() const { return registry_; }
    LexerRegistry& registry() { return registry_; }
    int window() const { return window_; }
    AggregationMode aggregation() const { return aggregation_; }
    double threshold() const { return threshold_; }
    void set_aggregation(AggregationMode mode) { aggregation_ = mode; }
    void set_threshold(double threshold) { threshold_ = threshold; }

    std::vector<std::string> binaries() const; // trained ones, sorted
    bool has_model(const std::string& binary) const;
    const Vocabulary& vocabulary(const std::string& binary) const;
    const TokenClassifier& classifier(const std::string& binary) const;
    const ModelMeta& meta(const std::string& binary) const;

    std::string extract_binary(const std::string& command_line) const;

    // extract -> tokenize -> encode -> score -> aggregate -> classify ->
    // whitelist. Empty-token commands score 0 and come back benign.
    Prediction predict(const std::string& command_line) const;

    // Rebuilds one binary's vocabulary and classifier from its samples;
    // every other binary's state is untouched.
    TrainReport retrain_binary(const std::string& binary,
                               const std::vector<LabeledSample>& samples,
                               const Hyperparams& hyper, std::string trained_at = {});

    const std::vector<WhitelistRule>& whitelist() const { return whitelist_; }
    void set_whitelist(std::vector<WhitelistRule> rules) { whitelist_ = std::move(rules); }
    void add_whitelist_rule(WhitelistRule rule) { whitelist_.push_back(std::move(rule)); }

    // Sets Prediction::suppressed on the first matching rule; the reported
    // label flips to benign but the raw score stays.
    bool apply_whitelist(Prediction& prediction) const;

    // manifest.json + whitelist.txt + one subdirectory per binary.
    void save(const std::filesystem::path& artifact_dir) const;
    static Unimodel load(const std::filesystem::path& artifact_dir);

private:
    struct BinaryModel {
        Vocabulary vocab;
        TokenClassifier clf;
        ModelMeta meta;
    };

    const BinaryModel& model_for(const std::string& binary) const;

    LexerRegistry registry_;
    std::map<std::string, BinaryModel> models_;
    std::vector<WhitelistRule> whitelist_;
    int window_ = 2;
    AggregationMode aggregation_ = AggregationMode::Max;
    double threshold_ = 0.5;
};

} // namespace lolguard
