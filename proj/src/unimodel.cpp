#include "lolguard/unimodel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lolguard/errors.hpp"
#include "lolguard/features.hpp"
#include "lolguard/rng.hpp"

namespace lolguard {

namespace {

// Lowercased, trimmed, inner whitespace runs collapsed. This is the identity
// used by exact whitelist rules.
std::string normalized_command(const std::string& command_line) {
    std::string out;
    out.reserve(command_line.size());
    bool pending_space = false;
    for (char raw : command_line) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

nlohmann::json metrics_to_json(const std::optional<Metrics>& metrics) {
    if (!metrics) return nullptr;
    return nlohmann::json{
        {"accuracy", metrics->accuracy},
        {"precision", metrics->precision},
        {"recall", metrics->recall},
        {"f1", metrics->f1},
        {"confusion",
         {{"tp", metrics->confusion.tp},
          {"fp", metrics->confusion.fp},
          {"tn", metrics->confusion.tn},
          {"fn", metrics->confusion.fn}}},
    };
}

std::optional<Metrics> metrics_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    try {
        Metrics m;
        m.accuracy = j.at("accuracy").get<double>();
        m.precision = j.at("precision").get<double>();
        m.recall = j.at("recall").get<double>();
        m.f1 = j.at("f1").get<double>();
        const auto& c = j.at("confusion");
        m.confusion.tp = c.at("tp").get<long>();
        m.confusion.fp = c.at("fp").get<long>();
        m.confusion.tn = c.at("tn").get<long>();
        m.confusion.fn = c.at("fn").get<long>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed metrics record: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string quote_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += '"' + items[i] + '"';
    }
    return out + "]";
}

// Advisory writer lock held while artifacts are written.
class ArtifactLock {
public:
    explicit ArtifactLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (f == nullptr)
            throw IoError("artifact directory is locked by another writer: " + dir.string());
        std::fclose(f);
    }
    ~ArtifactLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    ArtifactLock(const ArtifactLock&) = delete;
    ArtifactLock& operator=(const ArtifactLock&) = delete;

private:
    std::filesystem::path path_;
};

} // namespace

WhitelistRule WhitelistRule::parse(const std::string& line) {
    WhitelistRule rule;
    if (line.rfind("exact:", 0) == 0) {
        rule.kind = Kind::Exact;
        rule.pattern = line.substr(6);
    } else if (line.rfind("regex:", 0) == 0) {
        rule.kind = Kind::Regex;
        rule.pattern = line.substr(6);
        try {
            std::regex probe(rule.pattern);
        } catch (const std::regex_error& e) {
            throw FormatError("whitelist: bad regex `" + rule.pattern + "`: " + e.what());
        }
    } else {
        throw FormatError("whitelist: rule must start with `exact:` or `regex:`");
    }
    return rule;
}

std::string WhitelistRule::serialize() const {
    return (kind == Kind::Exact ? "exact:" : "regex:") + pattern;
}

bool WhitelistRule::matches(const std::string& command_line) const {
    if (kind == Kind::Exact)
        return normalized_command(command_line) == normalized_command(pattern);
    return std::regex_match(command_line, std::regex(pattern));
}

std::string extract_binary(const std::string& command_line, const LexerRegistry& registry) {
    const std::vector<std::string> raw = split_raw(command_line);
    if (raw.empty()) throw UnsupportedBinaryError("(empty command line)");
    const std::string name = program_name(raw.front());
    if (name.empty() || !registry.supported(name))
        throw UnsupportedBinaryError(name.empty() ? raw.front() : name);
    return name;
}

Unimodel::Unimodel(LexerRegistry registry, int window, AggregationMode aggregation,
                   double threshold)
    : registry_(std::move(registry)), window_(window), aggregation_(aggregation),
      threshold_(threshold) {
    if (window_ < 1) throw std::invalid_argument("window must be >= 1");
    if (threshold_ < 0.0 || threshold_ > 1.0)
        throw std::invalid_argument("threshold must lie in [0, 1]");
}

std::vector<std::string> Unimodel::binaries() const {
    std::vector<std::string> names;
    names.reserve(models_.size());
    for (const auto& [name, _] : models_) names.push_back(name);
    return names;
}

bool Unimodel::has_model(const std::string& binary) const {
    return models_.find(binary) != models_.end();
}

const Unimodel::BinaryModel& Unimodel::model_for(const std::string& binary) const {
    auto it = models_.find(binary);
    if (it == models_.end()) throw ModelMissingError(binary);
    return it->second;
}

const Vocabulary& Unimodel::vocabulary(const std::string& binary) const {
    return model_for(binary).vocab;
}

const TokenClassifier& Unimodel::classifier(const std::string& binary) const {
    return model_for(binary).clf;
}

const ModelMeta& Unimodel::meta(const std::string& binary) const {
    return model_for(binary).meta;
}

std::string Unimodel::extract_binary(const std::string& command_line) const {
    return lolguard::extract_binary(command_line, registry_);
}

Prediction Unimodel::predict(const std::string& command_line) const {
    Prediction p;
    p.command_line = command_line;
    p.binary = extract_binary(command_line);

    const BinaryModel& bm = model_for(p.binary);
    p.tokens = registry_.lexer_for(p.binary).tokenize({p.binary, command_line});

    if (p.tokens.tokens.empty()) {
        // a bare invocation exposes no argument patterns to score
        p.token_scores = Eigen::VectorXd(0);
        p.command_score = 0.0;
        p.label = Label::Benign;
    } else {
        const Eigen::MatrixXd X = command_matrix(p.tokens, bm.vocab, window_);
        p.token_scores = bm.clf.predict_token_scores(X);
        p.command_score = aggregate(p.token_scores, aggregation_);
        p.label = classify(p.command_score, threshold_);
    }

    apply_whitelist(p);
    return p;
}

bool Unimodel::apply_whitelist(Prediction& prediction) const {
    for (const WhitelistRule& rule : whitelist_) {
        if (rule.matches(prediction.command_line)) {
            prediction.suppressed = true;
            prediction.label = Label::Benign;
            return true;
        }
    }
    prediction.suppressed = false;
    return false;
}

TrainReport Unimodel::retrain_binary(const std::string& binary,
                                     const std::vector<LabeledSample>& samples,
                                     const Hyperparams& hyper, std::string trained_at) {
    if (!registry_.supported(binary)) throw UnsupportedBinaryError(binary);
    if (samples.empty()) throw EmptyTrainingError("no samples for " + binary);
    for (const LabeledSample& s : samples)
        if (s.binary != binary)
            throw std::invalid_argument("sample for " + s.binary + " passed to retrain of " +
                                        binary);

    const Lexer& lexer = registry_.lexer_for(binary);
    const std::uint64_t binary_seed = mix_seed(hyper.seed, "binary." + binary);

    // Corpus first, from the binary's entire dataset.
    std::vector<std::pair<TokenizedCommand, Label>> tokenized;
    tokenized.reserve(samples.size());
    for (const LabeledSample& s : samples)
        tokenized.emplace_back(lexer.tokenize({binary, s.command_line}), s.label);
    Vocabulary vocab = build_vocabulary(binary, tokenized);

    const DatasetSplit sp = split(samples, 0.8, binary_seed);

    // One training row per token of every training command.
    std::vector<Eigen::VectorXd> rows;
    std::vector<Label> row_labels;
    for (const LabeledSample& s : sp.train) {
        const TokenizedCommand tc = lexer.tokenize({binary, s.command_line});
        for (std::size_t i = 0; i < tc.tokens.size(); ++i) {
            rows.push_back(token_vector(tc.tokens, i, vocab, window_));
            row_labels.push_back(s.label);
        }
    }
    if (rows.empty())
        throw EmptyTrainingError("every training command for " + binary +
                                 " tokenized to nothing");

    const std::size_t pre_smote_vectors = rows.size();
    const ClassifierKind kind = select_classifier_kind(
        pre_smote_vectors, static_cast<std::size_t>(hyper.sample_threshold));

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(vocab.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = rows[i];

    auto [Xb, yb] = balance_training_matrix(X, row_labels, hyper.smote_k, binary_seed);

    Hyperparams local = hyper;
    local.seed = mix_seed(binary_seed, "train");
    TokenClassifier clf = TokenClassifier::train(kind, Xb, yb, local, binary);

    ModelMeta meta;
    meta.trained_at = std::move(trained_at);
    for (const LabeledSample& s : samples)
        (s.label == Label::Benign ? meta.benign_samples : meta.malicious_samples) += 1;
    meta.train_vectors = pre_smote_vectors;
    meta.test_samples = sp.test.size();

    if (!sp.test.empty()) {
        std::vector<Label> predicted;
        std::vector<Label> truth;
        for (const LabeledSample& s : sp.test) {
            const TokenizedCommand tc = lexer.tokenize({binary, s.command_line});
            double score = 0.0;
            if (!tc.tokens.empty()) {
                const Eigen::VectorXd scores =
                    clf.predict_token_scores(command_matrix(tc, vocab, window_));
                score = aggregate(scores, aggregation_);
            }
            predicted.push_back(classify(score, threshold_));
            truth.push_back(s.label);
        }
        meta.metrics = compute_metrics(predicted, truth);
    }

    TrainReport report{binary, kind, meta};
    models_.insert_or_assign(binary,
                             BinaryModel{std::move(vocab), std::move(clf), std::move(meta)});
    return report;
}

void Unimodel::save(const std::filesystem::path& artifact_dir) const {
    std::error_code ec;
    std::filesystem::create_directories(artifact_dir, ec);
    if (ec) throw IoError("cannot create artifact directory: " + artifact_dir.string());

    ArtifactLock lock(artifact_dir);

    nlohmann::json manifest{
        {"version", kManifestVersion},
        {"binaries", binaries()},
        {"aggregation", aggregation_name(aggregation_)},
        {"threshold", threshold_},
        {"window", window_},
    };
    write_text_file(artifact_dir / "manifest.json", manifest.dump(2) + "\n");

    std::string whitelist_text;
    for (const WhitelistRule& rule : whitelist_) whitelist_text += rule.serialize() + "\n";
    write_text_file(artifact_dir / "whitelist.txt", whitelist_text);

    bool any_keywords = false;
    for (const std::string& name : registry_.binaries())
        if (!registry_.lexer_for(name).keywords().empty()) any_keywords = true;
    if (any_keywords) {
        std::filesystem::create_directories(artifact_dir / "keywords");
        for (const std::string& name : registry_.binaries()) {
            const KeywordLists& kw = registry_.lexer_for(name).keywords();
            if (kw.empty()) continue;
            write_text_file(artifact_dir / "keywords" / (name + ".toml"),
                            "benign = " + quote_list(kw.benign) + "\n" +
                                "malicious = " + quote_list(kw.malicious) + "\n");
        }
    }

    for (const auto& [name, bm] : models_) {
        const std::filesystem::path sub = artifact_dir / name;
        std::filesystem::create_directories(sub, ec);
        if (ec) throw IoError("cannot create " + sub.string());

        save_vocabulary(bm.vocab, sub / "vocab.txt");

        std::ostringstream model_text;
        bm.clf.save(model_text);
        write_text_file(sub / "model.bin", model_text.str());

        nlohmann::json mj{
            {"binary", name},
            {"classifier", classifier_kind_name(bm.clf.kind())},
            {"trained_at", bm.meta.trained_at},
            {"samples",
             {{"benign", bm.meta.benign_samples},
              {"malicious", bm.meta.malicious_samples},
              {"train_vectors", bm.meta.train_vectors},
              {"test", bm.meta.test_samples}}},
            {"metrics", metrics_to_json(bm.meta.metrics)},
        };
        write_text_file(sub / "metrics.json", mj.dump(2) + "\n");
    }
}

Unimodel Unimodel::load(const std::filesystem::path& artifact_dir) {
    const std::filesystem::path manifest_path = artifact_dir / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ManifestError("cannot read manifest: " + manifest_path.string());

    nlohmann::json manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object())
        throw ManifestError("malformed manifest: " + manifest_path.string());
    if (!manifest.contains("version") || !manifest["version"].is_number_integer())
        throw ManifestError("manifest is missing the schema version");
    if (manifest["version"].get<int>() != kManifestVersion)
        throw ManifestError("unsupported manifest version " +
                            std::to_string(manifest["version"].get<int>()));

    LexerRegistry registry;
    registry.load_keywords_dir(artifact_dir / "keywords");

    Unimodel uni = [&]() -> Unimodel {
        try {
            return Unimodel(std::move(registry), manifest.value("window", 2),
                            parse_aggregation(manifest.value("aggregation", std::string("max"))),
                            manifest.value("threshold", 0.5));
        } catch (const nlohmann::json::exception& e) {
            throw ManifestError(std::string("malformed manifest field: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ManifestError(std::string("manifest holds an invalid value: ") + e.what());
        }
    }();

    const std::filesystem::path whitelist_path = artifact_dir / "whitelist.txt";
    if (std::filesystem::exists(whitelist_path)) {
        std::ifstream wl(whitelist_path, std::ios::binary);
        if (!wl) throw IoError("cannot read " + whitelist_path.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(wl, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            try {
                uni.whitelist_.push_back(WhitelistRule::parse(line));
            } catch (const FormatError& e) {
                throw FormatError(whitelist_path.string() + ":" + std::to_string(lineno) + ": " +
                                  e.what());
            }
        }
    }

    const nlohmann::json binaries = manifest.value("binaries", nlohmann::json::array());
    if (!binaries.is_array())
        throw ManifestError("manifest field `binaries` must be an array");
    for (const auto& name_json : binaries) {
        if (!name_json.is_string())
            throw ManifestError("manifest field `binaries` must hold strings");
        const std::string name = name_json.get<std::string>();
        if (!uni.registry_.supported(name)) uni.registry_.register_binary(name);

        const std::filesystem::path sub = artifact_dir / name;
        const std::filesystem::path vocab_path = sub / "vocab.txt";
        const std::filesystem::path model_path = sub / "model.bin";
        if (!std::filesystem::exists(vocab_path))
            throw ManifestError("manifest lists " + name + " but " + vocab_path.string() +
                                " is missing");
        if (!std::filesystem::exists(model_path))
            throw ManifestError("manifest lists " + name + " but " + model_path.string() +
                                " is missing");

        BinaryModel bm{load_vocabulary(vocab_path, name), TokenClassifier(), ModelMeta{}};
        std::ifstream model_in(model_path, std::ios::binary);
        if (!model_in) throw IoError("cannot read " + model_path.string());
        bm.clf = TokenClassifier::load(model_in);

        if (static_cast<Eigen::Index>(bm.vocab.size()) != bm.clf.input_dim())
            throw ManifestError(name + ": vocabulary size " + std::to_string(bm.vocab.size()) +
                                " does not match model input dimension " +
                                std::to_string(bm.clf.input_dim()));

        const std::filesystem::path metrics_path = sub / "metrics.json";
        if (std::filesystem::exists(metrics_path)) {
            std::ifstream mi(metrics_path, std::ios::binary);
            nlohmann::json mj = nlohmann::json::parse(mi, nullptr, false);
            if (mj.is_discarded())
                throw FormatError("malformed metrics file: " + metrics_path.string());
            try {
                bm.meta.trained_at = mj.value("trained_at", std::string{});
                if (mj.contains("samples")) {
                    const auto& s = mj["samples"];
                    bm.meta.benign_samples = s.value("benign", std::size_t{0});
                    bm.meta.malicious_samples = s.value("malicious", std::size_t{0});
                    bm.meta.train_vectors = s.value("train_vectors", std::size_t{0});
                    bm.meta.test_samples = s.value("test", std::size_t{0});
                }
                if (mj.contains("metrics")) bm.meta.metrics = metrics_from_json(mj["metrics"]);
            } catch (const nlohmann::json::exception& e) {
                throw FormatError(metrics_path.string() + ": " + e.what());
            }
        }

        uni.models_.emplace(name, std::move(bm));
    }
    return uni;
}

} // namespace lolguard
