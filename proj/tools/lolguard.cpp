// lolguard CLI: train per-binary detectors, score commands, evaluate a
// validation set and inspect tokenization.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lolguard/errors.hpp"
#include "lolguard/features.hpp"
#include "lolguard/unimodel.hpp"

namespace {

using namespace lolguard;

constexpr int kExitMalicious = 1;
constexpr int kExitInputError = 2;
constexpr int kExitWriteError = 3;

struct CliConfig {
    std::string artifact_dir = "artifacts";
    std::string dataset_path;
    std::string validation_path;
    std::uint64_t seed = 0;
    int window = 2;
    std::string aggregation = "max";
    double threshold = 0.5;
    bool json = false;
    bool strict = false;
    bool vectors = false;
    std::string command; // single-command input for predict/tokenize
};

std::string fmt_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt_metric(const std::optional<Metrics>& m, double Metrics::*field) {
    return m ? fmt_score((*m).*field) : std::string("---");
}

void print_metrics_row(const std::string& name, const std::string& kind,
                       const std::optional<Metrics>& m) {
    std::printf("%-12s %-10s %9s %9s %9s %9s\n", name.c_str(), kind.c_str(),
                fmt_metric(m, &Metrics::accuracy).c_str(),
                fmt_metric(m, &Metrics::precision).c_str(),
                fmt_metric(m, &Metrics::recall).c_str(), fmt_metric(m, &Metrics::f1).c_str());
}

LexerRegistry registry_for(const CliConfig& cfg) {
    LexerRegistry registry;
    registry.load_keywords_dir(std::filesystem::path(cfg.artifact_dir) / "keywords");
    return registry;
}

std::vector<WhitelistRule> existing_whitelist(const std::filesystem::path& artifact_dir) {
    std::vector<WhitelistRule> rules;
    std::ifstream in(artifact_dir / "whitelist.txt", std::ios::binary);
    if (!in) return rules;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        rules.push_back(WhitelistRule::parse(line));
    }
    return rules;
}

int cmd_train(const CliConfig& cfg) {
    std::vector<LabeledSample> samples;
    LexerRegistry registry = registry_for(cfg);
    try {
        samples = load_dataset(cfg.dataset_path, registry);
    } catch (const Error& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitInputError;
    }
    if (samples.empty()) {
        std::cerr << "dataset error: " << cfg.dataset_path << " holds no samples\n";
        return kExitInputError;
    }

    Unimodel uni(std::move(registry), cfg.window, parse_aggregation(cfg.aggregation),
                 cfg.threshold);
    try {
        uni.set_whitelist(existing_whitelist(cfg.artifact_dir)); // survives retraining
    } catch (const Error& e) {
        std::cerr << "whitelist error: " << e.what() << "\n";
        return kExitInputError;
    }

    Hyperparams hyper;
    hyper.seed = cfg.seed;

    std::vector<TrainReport> reports;
    for (const auto& [binary, binary_samples] : partition_by_binary(samples))
        reports.push_back(uni.retrain_binary(binary, binary_samples, hyper));

    Metrics sum;
    int evaluated = 0;
    for (const TrainReport& r : reports) {
        if (!r.meta.metrics) continue;
        sum.accuracy += r.meta.metrics->accuracy;
        sum.precision += r.meta.metrics->precision;
        sum.recall += r.meta.metrics->recall;
        sum.f1 += r.meta.metrics->f1;
        ++evaluated;
    }
    std::optional<Metrics> average;
    if (evaluated > 0) {
        average = Metrics{sum.accuracy / evaluated, sum.precision / evaluated,
                          sum.recall / evaluated, sum.f1 / evaluated, {}};
    }

    if (cfg.json) {
        for (const TrainReport& r : reports) {
            nlohmann::json row{{"binary", r.binary},
                               {"classifier", classifier_kind_name(r.kind)},
                               {"metrics", nullptr}};
            if (r.meta.metrics)
                row["metrics"] = {{"accuracy", r.meta.metrics->accuracy},
                                  {"precision", r.meta.metrics->precision},
                                  {"recall", r.meta.metrics->recall},
                                  {"f1", r.meta.metrics->f1}};
            std::cout << row.dump() << "\n";
        }
        if (average)
            std::cout << nlohmann::json{{"binary", "AVERAGE"},
                                        {"metrics",
                                         {{"accuracy", average->accuracy},
                                          {"precision", average->precision},
                                          {"recall", average->recall},
                                          {"f1", average->f1}}}}
                             .dump()
                      << "\n";
    } else {
        std::printf("%-12s %-10s %9s %9s %9s %9s\n", "binary", "classifier", "accuracy",
                    "precision", "recall", "f1");
        for (const TrainReport& r : reports)
            print_metrics_row(r.binary, classifier_kind_name(r.kind), r.meta.metrics);
        print_metrics_row("AVERAGE", "---", average);
    }

    try {
        uni.save(cfg.artifact_dir);
    } catch (const Error& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return kExitWriteError;
    }
    return 0;
}

void print_prediction(const Prediction& p, bool json) {
    if (json) {
        std::cout << nlohmann::json{{"binary", p.binary},
                                    {"command", p.command_line},
                                    {"score", p.command_score},
                                    {"label", label_name(p.label)},
                                    {"suppressed", p.suppressed}}
                         .dump()
                  << "\n";
    } else {
        std::printf("%-12s %8s %-10s %s\n", p.binary.c_str(), fmt_score(p.command_score).c_str(),
                    label_name(p.label).c_str(), p.suppressed ? "suppressed" : "-");
    }
}

void print_error_record(const std::string& message, const std::string& command, bool json) {
    if (json)
        std::cout << nlohmann::json{{"error", message}, {"command", command}}.dump() << "\n";
    else
        std::printf("error: %s (command: %s)\n", message.c_str(), command.c_str());
}

int cmd_predict(const CliConfig& cfg, const std::vector<std::string>& agg_threshold_set) {
    Unimodel uni = [&] {
        try {
            return Unimodel::load(cfg.artifact_dir);
        } catch (const Error& e) {
            std::cerr << "artifact error: " << e.what() << "\n";
            std::exit(kExitInputError);
        }
    }();
    // explicit flags override what the manifest recorded
    for (const std::string& flag : agg_threshold_set) {
        if (flag == "agg") uni.set_aggregation(parse_aggregation(cfg.aggregation));
        if (flag == "threshold") uni.set_threshold(cfg.threshold);
    }

    bool any_malicious = false;
    auto process = [&](const std::string& line) -> bool {
        try {
            const Prediction p = uni.predict(line);
            if (p.label == Label::Malicious) any_malicious = true;
            print_prediction(p, cfg.json);
            return true;
        } catch (const Error& e) {
            print_error_record(e.what(), line, cfg.json);
            return !cfg.strict;
        }
    };

    if (!cfg.command.empty()) {
        if (!process(cfg.command)) return kExitInputError;
    } else {
        std::string line;
        while (std::getline(std::cin, line)) {
            if (line.empty()) continue;
            if (!process(line)) return kExitInputError;
        }
    }
    return any_malicious ? kExitMalicious : 0;
}

int cmd_evaluate(const CliConfig& cfg) {
    Unimodel uni = [&] {
        try {
            return Unimodel::load(cfg.artifact_dir);
        } catch (const Error& e) {
            std::cerr << "artifact error: " << e.what() << "\n";
            std::exit(kExitInputError);
        }
    }();

    std::vector<LabeledSample> samples;
    try {
        samples = load_dataset(cfg.validation_path, uni.registry());
    } catch (const Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInputError;
    }
    if (samples.empty()) {
        std::cerr << "validation error: " << cfg.validation_path << " holds no samples\n";
        return kExitInputError;
    }

    struct Counts {
        int detected = 0;
        int total = 0;
    };
    std::map<std::string, Counts> per_binary;
    std::vector<Label> predicted;
    std::vector<Label> truth;
    bool any_benign = false;

    for (const LabeledSample& s : samples) {
        Label label = Label::Benign;
        try {
            label = uni.predict(s.command_line).label;
        } catch (const Error&) {
            // unroutable or untrained: counts as a miss
        }
        predicted.push_back(label);
        truth.push_back(s.label);
        if (s.label == Label::Malicious) {
            Counts& c = per_binary[s.binary];
            ++c.total;
            if (label == Label::Malicious) ++c.detected;
        } else {
            any_benign = true;
        }
    }

    int detected = 0;
    int total = 0;
    for (const auto& [binary, c] : per_binary) {
        detected += c.detected;
        total += c.total;
    }

    if (cfg.json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [binary, c] : per_binary)
            rows.push_back({{"binary", binary}, {"detected", c.detected}, {"total", c.total}});
        nlohmann::json out{{"binaries", rows}, {"detected", detected}, {"total", total}};
        if (any_benign) {
            const Metrics m = compute_metrics(predicted, truth);
            out["metrics"] = {{"accuracy", m.accuracy},
                              {"precision", m.precision},
                              {"recall", m.recall},
                              {"f1", m.f1}};
        }
        std::cout << out.dump() << "\n";
    } else {
        std::printf("%-12s %9s\n", "binary", "detected");
        for (const auto& [binary, c] : per_binary)
            std::printf("%-12s %6d/%d\n", binary.c_str(), c.detected, c.total);
        std::printf("%-12s %6d/%d\n", "TOTAL", detected, total);
        if (any_benign) {
            const Metrics m = compute_metrics(predicted, truth);
            std::printf("accuracy %s precision %s recall %s f1 %s\n",
                        fmt_score(m.accuracy).c_str(), fmt_score(m.precision).c_str(),
                        fmt_score(m.recall).c_str(), fmt_score(m.f1).c_str());
        }
    }
    return 0;
}

int cmd_tokenize(const CliConfig& cfg) {
    LexerRegistry registry = registry_for(cfg);

    std::string binary;
    TokenizedCommand tc;
    try {
        binary = extract_binary(cfg.command, registry);
        tc = registry.tokenize({binary, cfg.command});
    } catch (const Error& e) {
        std::cerr << "tokenize error: " << e.what() << "\n";
        return kExitInputError;
    }

    std::optional<Eigen::MatrixXd> matrix;
    if (cfg.vectors) {
        try {
            const Unimodel uni = Unimodel::load(cfg.artifact_dir);
            matrix = command_matrix(tc, uni.vocabulary(binary), uni.window());
        } catch (const Error& e) {
            std::cerr << "artifact error: " << e.what() << "\n";
            return kExitInputError;
        }
    }

    if (cfg.json) {
        nlohmann::json tokens = nlohmann::json::array();
        for (const Token& t : tc.tokens) tokens.push_back(t.text);
        nlohmann::json out{{"binary", binary}, {"tokens", tokens}};
        if (matrix) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < matrix->rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < matrix->cols(); ++c)
                    if ((*matrix)(r, c) != 0.0)
                        row.push_back({{"index", c}, {"value", (*matrix)(r, c)}});
                rows.push_back(row);
            }
            out["vectors"] = rows;
        }
        std::cout << out.dump() << "\n";
    } else {
        std::cout << binary << ":";
        for (const Token& t : tc.tokens) std::cout << " " << t.text;
        std::cout << "\n";
        if (matrix) {
            for (Eigen::Index r = 0; r < matrix->rows(); ++r) {
                std::cout << r << ":";
                for (Eigen::Index c = 0; c < matrix->cols(); ++c)
                    if ((*matrix)(r, c) != 0.0) std::cout << " " << c << ":" << (*matrix)(r, c);
                std::cout << "\n";
            }
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Token-pattern detector for living-off-the-land binary abuse"};
    app.require_subcommand(1);

    CliConfig cfg;

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--artifacts", cfg.artifact_dir, "Artifact directory")
            ->envname("LOLGUARD_ARTIFACTS");
        sub->add_flag("--json", cfg.json, "Emit one JSON object per output line");
    };

    CLI::App* train = app.add_subcommand("train", "Train per-binary models from a dataset");
    add_common(train);
    train->add_option("--dataset", cfg.dataset_path, "JSON-lines training dataset")->required();
    train->add_option("--seed", cfg.seed, "Training seed");
    train->add_option("--window", cfg.window, "Feature window size")
        ->check(CLI::PositiveNumber);
    train->add_option("--agg", cfg.aggregation, "Token score pooling: max|min|avg")
        ->check(CLI::IsMember({"max", "min", "avg"}));
    train->add_option("--threshold", cfg.threshold, "Decision threshold")
        ->check(CLI::Range(0.0, 1.0));

    CLI::App* predict = app.add_subcommand("predict", "Score commands (argument or stdin lines)");
    add_common(predict);
    predict->add_option("command", cfg.command, "Single command line to score");
    predict->add_flag("--strict", cfg.strict, "Stop with exit 2 on routing/model errors");
    CLI::Option* predict_agg =
        predict->add_option("--agg", cfg.aggregation, "Override pooling mode")
            ->check(CLI::IsMember({"max", "min", "avg"}));
    CLI::Option* predict_threshold =
        predict->add_option("--threshold", cfg.threshold, "Override decision threshold")
            ->check(CLI::Range(0.0, 1.0));

    CLI::App* evaluate = app.add_subcommand("evaluate", "Report detections on a validation set");
    add_common(evaluate);
    evaluate->add_option("--validation", cfg.validation_path, "JSON-lines validation dataset")
        ->required();

    CLI::App* tokenize = app.add_subcommand("tokenize", "Show the token stream for a command");
    add_common(tokenize);
    tokenize->add_option("command", cfg.command, "Command line to tokenize")->required();
    tokenize->add_flag("--vectors", cfg.vectors,
                       "Also print per-token feature vectors (needs artifacts)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(cfg);
        if (predict->parsed()) {
            std::vector<std::string> overridden;
            if (predict_agg->count() > 0) overridden.push_back("agg");
            if (predict_threshold->count() > 0) overridden.push_back("threshold");
            return cmd_predict(cfg, overridden);
        }
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (tokenize->parsed()) return cmd_tokenize(cfg);
    } catch (const lolguard::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return 0;
}
