#pragma once

#include <string>
#include <vector>

namespace lolguard {

// Lexical classes a token can take after pattern substitution. Most kinds
// stand for one canonical placeholder text such as "<url>"; Word keeps the
// normalized surface text and Ext carries the matched extension.
enum class TokenKind {
    Word,
    Url,
    File,
    Ext,
    Ads,
    Share,
    Number,
    Decimal,
    IpAddr,
    Guid,
    BenignKeyword,
    MalKeyword,
    Script,
    Javascript,
    Dll,
    Rare,
};

struct Token {
    TokenKind kind = TokenKind::Word;
    // Canonical placeholder ("<url>", "<ext_exe>", ...) or, for Word, the
    // normalized lowercase surface string.
    std::string text;
    // Original pre-normalization substring. Debugging only; never encoded.
    std::string raw;

    friend bool operator==(const Token& a, const Token& b) {
        return a.kind == b.kind && a.text == b.text;
    }
};

// Canonical text of a non-Word, non-Ext kind, e.g. "<url>".
const std::string& canonical_text(TokenKind kind);

// Canonical text of an extension token, e.g. ext_token_text("exe") == "<ext_exe>".
std::string ext_token_text(const std::string& extension);

Token make_word(std::string text, std::string raw = {});
Token make_special(TokenKind kind, std::string raw = {});
Token make_ext(const std::string& extension, std::string raw = {});

struct RawCommand {
    std::string binary_name;  // lowercase, one of the supported names
    std::string command_line; // full command as executed, program token included
};

struct TokenizedCommand {
    std::string binary;
    std::vector<Token> tokens;

    // Encoding-relevant identity: token texts in order. Used for
    // deduplication when counting unique commands.
    std::string sequence_key() const;
};

} // namespace lolguard
