#include "lolguard/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "lolguard/errors.hpp"
#include "lolguard/rng.hpp"

namespace lolguard {

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        const LexerRegistry& registry) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset: " + path.string());

    std::vector<LabeledSample> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno, "invalid JSON");
        if (!j.is_object()) throw ParseError(lineno, "expected a JSON object");
        if (!j.contains("binary") || !j["binary"].is_string())
            throw ParseError(lineno, "missing string field `binary`");
        if (!j.contains("command") || !j["command"].is_string())
            throw ParseError(lineno, "missing string field `command`");
        if (!j.contains("label") || !j["label"].is_string())
            throw ParseError(lineno, "missing string field `label`");

        LabeledSample s;
        s.binary = j["binary"].get<std::string>();
        s.command_line = j["command"].get<std::string>();
        if (!registry.supported(s.binary)) throw ParseError(lineno, "unknown binary: " + s.binary);
        try {
            s.label = parse_label(j["label"].get<std::string>());
        } catch (const FormatError& e) {
            throw ParseError(lineno, e.what());
        }
        if (j.contains("source")) {
            if (!j["source"].is_string()) throw ParseError(lineno, "`source` must be a string");
            s.source = j["source"].get<std::string>();
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

std::map<std::string, std::vector<LabeledSample>>
partition_by_binary(const std::vector<LabeledSample>& samples) {
    std::map<std::string, std::vector<LabeledSample>> out;
    for (const LabeledSample& s : samples) out[s.binary].push_back(s);
    return out;
}

DatasetSplit split(const std::vector<LabeledSample>& samples, double train_fraction,
                   std::uint64_t seed) {
    if (samples.empty()) throw EmptyDatasetError("cannot split an empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");

    DatasetSplit out;
    out.seed = seed;

    std::vector<std::size_t> benign_idx;
    std::vector<std::size_t> malicious_idx;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].label == Label::Benign ? benign_idx : malicious_idx).push_back(i);

    // A binary with only one class trains on everything; there is nothing
    // meaningful to hold out.
    if (benign_idx.empty() || malicious_idx.empty()) {
        out.train = samples;
        return out;
    }

    std::mt19937_64 rng(mix_seed(seed, "dataset.split"));
    for (std::vector<std::size_t>* cls : {&benign_idx, &malicious_idx}) {
        deterministic_shuffle(*cls, rng);
        const auto n_train =
            static_cast<std::size_t>(train_fraction * static_cast<double>(cls->size()));
        for (std::size_t i = 0; i < cls->size(); ++i)
            (i < n_train ? out.train : out.test).push_back(samples[(*cls)[i]]);
    }
    return out;
}

Eigen::MatrixXd smote(const Eigen::MatrixXd& minority, int k, std::size_t target_count,
                      std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(minority.rows());
    if (n < 2) throw TooFewSamplesError("smote needs at least two minority samples");
    if (target_count < n)
        throw std::invalid_argument("target_count must be >= the minority count");

    const std::size_t n_synthetic = target_count - n;
    Eigen::MatrixXd synthetic(static_cast<Eigen::Index>(n_synthetic), minority.cols());
    if (n_synthetic == 0) return synthetic;

    const int k_eff = std::min<int>(k, static_cast<int>(n) - 1);

    // k nearest neighbors per sample, Euclidean, ties broken by index.
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((minority.row(static_cast<Eigen::Index>(i)) -
                               minority.row(static_cast<Eigen::Index>(j)))
                                  .squaredNorm(),
                              j);
        }
        std::sort(dist.begin(), dist.end());
        neighbors[i].reserve(static_cast<std::size_t>(k_eff));
        for (int t = 0; t < k_eff; ++t) neighbors[i].push_back(dist[static_cast<std::size_t>(t)].second);
    }

    std::mt19937_64 rng(mix_seed(seed, "dataset.smote"));
    for (std::size_t s = 0; s < n_synthetic; ++s) {
        const std::size_t x = s % n; // round-robin over the minority samples
        const std::size_t nb = neighbors[x][rand_below(rng, neighbors[x].size())];
        const double lambda = rand_unit(rng);
        synthetic.row(static_cast<Eigen::Index>(s)) =
            minority.row(static_cast<Eigen::Index>(x)) +
            lambda * (minority.row(static_cast<Eigen::Index>(nb)) -
                      minority.row(static_cast<Eigen::Index>(x)));
    }
    return synthetic;
}

std::pair<Eigen::MatrixXd, std::vector<Label>>
balance_training_matrix(const Eigen::MatrixXd& rows, const std::vector<Label>& labels,
                        int k, std::uint64_t seed) {
    if (static_cast<std::size_t>(rows.rows()) != labels.size())
        throw LengthMismatchError("row/label count mismatch");

    const auto malicious =
        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Malicious));
    const std::size_t benign = labels.size() - malicious;
    if (malicious == 0 || benign == 0 || malicious == benign) return {rows, labels};

    const Label minority_label = malicious < benign ? Label::Malicious : Label::Benign;
    const std::size_t minority_count = std::min(malicious, benign);
    const std::size_t majority_count = std::max(malicious, benign);

    Eigen::MatrixXd minority(static_cast<Eigen::Index>(minority_count), rows.cols());
    Eigen::Index next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == minority_label) minority.row(next++) = rows.row(static_cast<Eigen::Index>(i));

    Eigen::MatrixXd synthetic;
    if (minority_count == 1) {
        // One lone minority row: SMOTE has no segment to draw, replicate it.
        synthetic = minority.row(0).replicate(static_cast<Eigen::Index>(majority_count - 1), 1);
    } else {
        synthetic = smote(minority, k, majority_count, seed);
    }

    Eigen::MatrixXd balanced(rows.rows() + synthetic.rows(), rows.cols());
    balanced.topRows(rows.rows()) = rows;
    balanced.bottomRows(synthetic.rows()) = synthetic;

    std::vector<Label> out_labels = labels;
    out_labels.insert(out_labels.end(), static_cast<std::size_t>(synthetic.rows()), minority_label);
    return {std::move(balanced), std::move(out_labels)};
}

} // namespace lolguard
