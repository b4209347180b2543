#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lolguard/token.hpp"

namespace lolguard {

// Whitespace splitting, except that a run wrapped in double quotes stays one
// raw token (quotes retained for the normalizer). An unterminated quote eats
// the remainder of the line.
std::vector<std::string> split_raw(std::string_view command_line);

// Strips leading and trailing quotes, dashes and slashes, then lowercases.
// May return an empty string; callers drop empty results.
std::string normalize(std::string_view raw_token);

// Program name of a command's first token: unquoted, last path component,
// lowercased, any .exe suffix removed.
std::string program_name(std::string_view raw_token);

// Per-binary keyword lists feeding the <benign_keyword>/<mal_keyword> tokens.
struct KeywordLists {
    std::vector<std::string> benign;
    std::vector<std::string> malicious;

    bool empty() const { return benign.empty() && malicious.empty(); }
};

// Parses the flat key/value keyword file format:
//   benign = ["query", "view"]
//   malicious = ["urlcache"]
KeywordLists parse_keyword_file(const std::filesystem::path& path);

// Tokenizer for one binary. The common pattern set is shared by all
// binaries; rundll32 and regsvr32 prepend their own patterns.
class Lexer {
public:
    Lexer(std::string binary, KeywordLists keywords = {});

    const std::string& binary() const { return binary_; }
    const KeywordLists& keywords() const { return keywords_; }

    // Tests one normalized token against the pattern cascade and emits the
    // matching special token(s), or a single Word token.
    std::vector<Token> apply_patterns(const std::string& normalized) const;

    // split -> normalize (dropping empties) -> apply_patterns, with the
    // leading program-path token removed from the stream.
    TokenizedCommand tokenize(const RawCommand& cmd) const;

private:
    std::vector<Token> apply_common(const std::string& tok, const std::string& raw) const;

    std::string binary_;
    KeywordLists keywords_;
    bool rundll32_patterns_ = false;
    bool regsvr32_patterns_ = false;
};

// Registry mapping binary names to their lexers. Default-constructed it
// holds the 16 supported binaries; further names can be registered and get
// the common pattern set.
class LexerRegistry {
public:
    LexerRegistry();

    static const std::vector<std::string>& default_binaries();

    bool supported(std::string_view name) const;
    const Lexer& lexer_for(std::string_view name) const; // throws UnsupportedBinaryError
    std::vector<std::string> binaries() const;           // sorted

    // Registers a new binary with the common pattern set. No-op if present.
    void register_binary(const std::string& name);
    void set_keywords(const std::string& binary, KeywordLists keywords);

    // Loads keywords/<binary>.toml files. A file named after an unknown
    // binary registers it.
    void load_keywords_dir(const std::filesystem::path& dir);

    TokenizedCommand tokenize(const RawCommand& cmd) const;

private:
    std::map<std::string, Lexer, std::less<>> lexers_;
};

// Convenience over a default registry (empty keyword lists).
std::vector<Token> apply_patterns(const std::string& normalized_token, const std::string& binary);
TokenizedCommand tokenize(const RawCommand& cmd);

} // namespace lolguard
