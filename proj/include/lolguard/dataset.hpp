#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lolguard/lexer.hpp"
#include "lolguard/vocabulary.hpp"

namespace lolguard {

struct LabeledSample {
    std::string binary;
    std::string command_line;
    Label label = Label::Benign;
    std::string source; // free-text provenance tag
};

struct DatasetSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    std::uint64_t seed = 0;
};

// JSON lines with fields binary, command, label and optional source.
// Unknown labels or binaries raise ParseError with the line number.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        const LexerRegistry& registry);

std::map<std::string, std::vector<LabeledSample>>
partition_by_binary(const std::vector<LabeledSample>& samples);

// Label-stratified split, floor(train_fraction * n) per class to train.
// A single-class input goes entirely to train with an empty test half.
DatasetSplit split(const std::vector<LabeledSample>& samples, double train_fraction,
                   std::uint64_t seed);

// Synthetic minority vectors on segments between k-nearest minority
// neighbors: s = x + lambda * (n - x), lambda uniform in [0,1). Emits
// target_count - rows(minority) synthetics. Needs at least two samples.
Eigen::MatrixXd smote(const Eigen::MatrixXd& minority, int k, std::size_t target_count,
                      std::uint64_t seed);

// Oversamples the minority class until the counts are equal; majority rows
// untouched, synthetics appended with the minority label. Single-class input
// passes through unchanged.
std::pair<Eigen::MatrixXd, std::vector<Label>>
balance_training_matrix(const Eigen::MatrixXd& rows, const std::vector<Label>& labels,
                        int k, std::uint64_t seed);

} // namespace lolguard
