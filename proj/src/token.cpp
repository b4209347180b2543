#include "lolguard/token.hpp"

#include <stdexcept>

namespace lolguard {

const std::string& canonical_text(TokenKind kind) {
    static const std::string url = "<url>";
    static const std::string file = "<file>";
    static const std::string ads = "<ads>";
    static const std::string share = "<share>";
    static const std::string number = "<number>";
    static const std::string decimal = "<decimal>";
    static const std::string ip_addr = "<ip_addr>";
    static const std::string guid = "<guid>";
    static const std::string benign_keyword = "<benign_keyword>";
    static const std::string mal_keyword = "<mal_keyword>";
    static const std::string script = "<script>";
    static const std::string javascript = "<javascript>";
    static const std::string dll = "<dll>";
    static const std::string rare = "<rare>";

    switch (kind) {
    case TokenKind::Url: return url;
    case TokenKind::File: return file;
    case TokenKind::Ads: return ads;
    case TokenKind::Share: return share;
    case TokenKind::Number: return number;
    case TokenKind::Decimal: return decimal;
    case TokenKind::IpAddr: return ip_addr;
    case TokenKind::Guid: return guid;
    case TokenKind::BenignKeyword: return benign_keyword;
    case TokenKind::MalKeyword: return mal_keyword;
    case TokenKind::Script: return script;
    case TokenKind::Javascript: return javascript;
    case TokenKind::Dll: return dll;
    case TokenKind::Rare: return rare;
    case TokenKind::Word:
    case TokenKind::Ext:
        break;
    }
    throw std::logic_error("token kind has no fixed canonical text");
}

std::string ext_token_text(const std::string& extension) {
    return "<ext_" + extension + ">";
}

Token make_word(std::string text, std::string raw) {
    return Token{TokenKind::Word, std::move(text), std::move(raw)};
}

Token make_special(TokenKind kind, std::string raw) {
    return Token{kind, canonical_text(kind), std::move(raw)};
}

Token make_ext(const std::string& extension, std::string raw) {
    return Token{TokenKind::Ext, ext_token_text(extension), std::move(raw)};
}

std::string TokenizedCommand::sequence_key() const {
    std::string key;
    for (const Token& t : tokens) {
        key += t.text;
        key += '\x1f';
    }
    return key;
}

} // namespace lolguard
