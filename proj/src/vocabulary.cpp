#include "lolguard/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "lolguard/errors.hpp"

namespace lolguard {

namespace {
const std::string kRare = "<rare>";
} // namespace

const std::string& label_name(Label label) {
    static const std::string benign = "benign";
    static const std::string malicious = "malicious";
    return label == Label::Benign ? benign : malicious;
}

Label parse_label(std::string_view name) {
    if (name == "benign") return Label::Benign;
    if (name == "malicious") return Label::Malicious;
    throw FormatError("unknown label: " + std::string(name));
}

Vocabulary::Vocabulary(std::string binary, std::vector<std::string> entries)
    : binary_(std::move(binary)), entries_(std::move(entries)) {
    bool rare_seen = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!index_.emplace(entries_[i], i).second)
            throw FormatError("duplicate vocabulary entry: " + entries_[i]);
        if (entries_[i] == kRare) {
            rare_index_ = i;
            rare_seen = true;
        }
    }
    if (!rare_seen) throw FormatError("vocabulary is missing the <rare> entry");
}

bool Vocabulary::contains(std::string_view text) const {
    return index_.find(std::string(text)) != index_.end();
}

std::size_t Vocabulary::index_of(std::string_view text) const {
    auto it = index_.find(std::string(text));
    return it == index_.end() ? rare_index_ : it->second;
}

Vocabulary build_vocabulary(const std::string& binary,
                            const std::vector<std::pair<TokenizedCommand, Label>>& samples) {
    std::set<std::string> included;

    // Any appearance in a malicious command is enough.
    for (const auto& [tc, label] : samples) {
        if (label != Label::Malicious) continue;
        for (const Token& t : tc.tokens) included.insert(t.text);
    }

    // Benign-side tokens need three distinct tokenized commands. Commands
    // that tokenize identically count once.
    std::unordered_set<std::string> seen_benign;
    std::unordered_map<std::string, int> benign_command_count;
    for (const auto& [tc, label] : samples) {
        if (label != Label::Benign) continue;
        if (!seen_benign.insert(tc.sequence_key()).second) continue;
        std::unordered_set<std::string> distinct;
        for (const Token& t : tc.tokens) distinct.insert(t.text);
        for (const std::string& text : distinct) ++benign_command_count[text];
    }
    for (const auto& [text, count] : benign_command_count)
        if (count >= 3) included.insert(text);

    included.insert(kRare);
    return Vocabulary(binary, {included.begin(), included.end()});
}

std::size_t encode_token(const Vocabulary& vocab, const Token& token) {
    return vocab.index_of(token.text);
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary: " + path.string());
    for (const std::string& entry : vocab.entries()) out << entry << '\n';
    if (!out) throw IoError("failed writing vocabulary: " + path.string());
}

Vocabulary load_vocabulary(const std::filesystem::path& path, std::string binary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read vocabulary: " + path.string());
    std::vector<std::string> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": empty entry");
        entries.push_back(line);
    }
    try {
        return Vocabulary(std::move(binary), std::move(entries));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace lolguard
