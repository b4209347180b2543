#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lolguard/token.hpp"

namespace lolguard {

enum class Label { Benign, Malicious };

const std::string& label_name(Label label);
Label parse_label(std::string_view name); // throws FormatError on unknown names

// Per-binary ordered token corpus with a dense index per entry and a
// reserved <rare> dust-bin entry.
class Vocabulary {
public:
    // Entries must be unique and contain "<rare>" exactly once. Order is
    // preserved; index = position.
    Vocabulary(std::string binary, std::vector<std::string> entries);

    const std::string& binary() const { return binary_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& entries() const { return entries_; }
    std::size_t rare_index() const { return rare_index_; }

    bool contains(std::string_view text) const;
    // Index of the entry, or rare_index() when absent. Never fails.
    std::size_t index_of(std::string_view text) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.binary_ == b.binary_ && a.entries_ == b.entries_;
    }

private:
    std::string binary_;
    std::vector<std::string> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t rare_index_ = 0;
};

// Corpus rule: every token text seen in a malicious command enters the
// vocabulary; benign-side tokens need at least three distinct tokenized
// commands (distinct by token-sequence equality). Entries come out sorted.
Vocabulary build_vocabulary(const std::string& binary,
                            const std::vector<std::pair<TokenizedCommand, Label>>& samples);

std::size_t encode_token(const Vocabulary& vocab, const Token& token);

// One entry per line, line number = index.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path, std::string binary);

} // namespace lolguard
