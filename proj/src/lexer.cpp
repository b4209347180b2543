#include "lolguard/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <optional>
#include <regex>

#include "lolguard/errors.hpp"

namespace lolguard {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_digits(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_hex(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isxdigit(c) != 0; });
}

// <number>: optional sign, digits only. Normalization strips leading dashes,
// but tokens reach this path unstripped in direct apply_patterns use too.
bool match_number(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    return is_digits(s);
}

// <decimal>: digits '.' digits.
bool match_decimal(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    auto dot = s.find('.');
    if (dot == std::string_view::npos) return false;
    return is_digits(s.substr(0, dot)) && is_digits(s.substr(dot + 1));
}

// <ip_addr>: dotted quad, octets 0..255.
bool match_ip(std::string_view s) {
    int parts = 0;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto dot = s.find('.', pos);
        std::string_view part =
            s.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        if (part.empty() || part.size() > 3 || !is_digits(part)) return false;
        int value = 0;
        for (char c : part) value = value * 10 + (c - '0');
        if (value > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
        if (pos > s.size()) return false;
    }
    return parts == 4;
}

// <guid>: 8-4-4-4-12 hex groups, optional braces.
bool match_guid(std::string_view s) {
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
    static constexpr std::array<std::size_t, 5> group = {8, 4, 4, 4, 12};
    std::size_t pos = 0;
    for (std::size_t g = 0; g < group.size(); ++g) {
        if (g > 0) {
            if (pos >= s.size() || s[pos] != '-') return false;
            ++pos;
        }
        if (pos + group[g] > s.size() || !is_hex(s.substr(pos, group[g]))) return false;
        pos += group[g];
    }
    return pos == s.size();
}

// File-style tail: a 1-5 alphanumeric extension after the last dot. Returns
// the extension when the whole string looks like a file name.
std::optional<std::string> file_extension(std::string_view s) {
    auto dot = s.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 >= s.size()) return std::nullopt;
    std::string_view ext = s.substr(dot + 1);
    if (ext.size() > 5) return std::nullopt;
    if (!std::all_of(ext.begin(), ext.end(),
                     [](unsigned char c) { return std::isalnum(c) != 0; }))
        return std::nullopt;
    if (std::any_of(s.begin(), s.end(), [](char c) { return is_space(c); })) return std::nullopt;
    return std::string(ext);
}

const std::regex& url_re() {
    static const std::regex re(R"(^https?://[^\s/]+(/\S*)?$)");
    return re;
}

// Post-normalization share: host \ component..., leading backslashes
// optional since normalize strips them.
const std::regex& share_re() {
    static const std::regex re(R"(^\\{0,2}([^\s\\:]+)(\\[^\s\\]+)+$)");
    return re;
}

const std::regex& ads_re() {
    static const std::regex re(R"(^[^\s:]+\.[a-z0-9]{1,5}:[^\s:]+\.[a-z0-9]{1,5}$)");
    return re;
}

const std::regex& dll_entry_re() {
    static const std::regex re(R"(^(\S+\.dll),(\S+)$)");
    return re;
}

const std::regex& script_re() {
    static const std::regex re(R"(^i:(\S+)$)");
    return re;
}

// Registry hives look like share paths once the leading backslashes are
// stripped; they must stay literal words.
bool is_registry_path(std::string_view first_component) {
    static constexpr std::array<std::string_view, 10> hives = {
        "hklm",  "hkcu", "hkcr", "hku",  "hkcc", "hkey_local_machine", "hkey_current_user",
        "hkey_classes_root", "hkey_users", "hkey_current_config",
    };
    return std::find(hives.begin(), hives.end(), first_component) != hives.end();
}

} // namespace

std::string program_name(std::string_view raw_token) {
    constexpr std::string_view exe_suffix = ".exe";
    while (!raw_token.empty() && (raw_token.front() == '"' || raw_token.front() == '\''))
        raw_token.remove_prefix(1);
    while (!raw_token.empty() && (raw_token.back() == '"' || raw_token.back() == '\''))
        raw_token.remove_suffix(1);
    auto sep = raw_token.find_last_of("\\/");
    if (sep != std::string_view::npos) raw_token = raw_token.substr(sep + 1);
    std::string name = to_lower(raw_token);
    if (name.size() > exe_suffix.size() &&
        name.compare(name.size() - exe_suffix.size(), exe_suffix.size(), exe_suffix) == 0)
        name.resize(name.size() - exe_suffix.size());
    return name;
}

std::vector<std::string> split_raw(std::string_view command_line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = command_line.size();
    while (i < n) {
        while (i < n && is_space(command_line[i])) ++i;
        if (i >= n) break;
        std::string tok;
        while (i < n && !is_space(command_line[i])) {
            if (command_line[i] == '"') {
                // quoted run: copy verbatim through the closing quote, or to
                // the end of the line when unterminated
                tok += command_line[i++];
                while (i < n && command_line[i] != '"') tok += command_line[i++];
                if (i < n) tok += command_line[i++];
            } else {
                tok += command_line[i++];
            }
        }
        out.push_back(std::move(tok));
    }
    return out;
}

std::string normalize(std::string_view raw_token) {
    auto strippable = [](char c) {
        return c == '"' || c == '\'' || c == '-' || c == '/' || c == '\\';
    };
    std::size_t begin = 0;
    std::size_t end = raw_token.size();
    while (begin < end && strippable(raw_token[begin])) ++begin;
    while (end > begin && strippable(raw_token[end - 1])) --end;
    return to_lower(raw_token.substr(begin, end - begin));
}

KeywordLists parse_keyword_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keyword file: " + path.string());

    KeywordLists lists;
    static const std::regex line_re(R"(^\s*(benign|malicious)\s*=\s*\[(.*)\]\s*$)");
    static const std::regex item_re(R"delim("([^"]*)")delim");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::smatch m;
        if (!std::regex_match(line, m, line_re))
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected `benign = [...]` or `malicious = [...]`");
        auto& dest = m[1] == "benign" ? lists.benign : lists.malicious;
        const std::string body = m[2];
        for (auto it = std::sregex_iterator(body.begin(), body.end(), item_re);
             it != std::sregex_iterator(); ++it)
            dest.push_back(to_lower((*it)[1].str()));
    }
    return lists;
}

Lexer::Lexer(std::string binary, KeywordLists keywords)
    : binary_(std::move(binary)), keywords_(std::move(keywords)) {
    rundll32_patterns_ = binary_ == "rundll32";
    regsvr32_patterns_ = binary_ == "regsvr32";
}

std::vector<Token> Lexer::apply_common(const std::string& tok, const std::string& raw) const {
    std::smatch m;

    if (std::regex_match(tok, m, url_re())) {
        std::vector<Token> out{make_special(TokenKind::Url, raw)};
        if (m[1].matched) {
            const std::string path = m[1].str();
            auto slash = path.rfind('/');
            if (auto ext = file_extension(path.substr(slash + 1)))
                out.push_back(make_ext(*ext, raw));
        }
        return out;
    }

    if (std::regex_match(tok, m, share_re()) && !is_registry_path(m[1].str())) {
        std::vector<Token> out{make_special(TokenKind::Share, raw)};
        auto sep = tok.find_last_of('\\');
        if (auto ext = file_extension(std::string_view(tok).substr(sep + 1)))
            out.push_back(make_ext(*ext, raw));
        return out;
    }

    if (std::regex_match(tok, ads_re())) return {make_special(TokenKind::Ads, raw)};
    if (match_guid(tok)) return {make_special(TokenKind::Guid, raw)};
    if (match_ip(tok)) return {make_special(TokenKind::IpAddr, raw)};
    if (match_decimal(tok)) return {make_special(TokenKind::Decimal, raw)};
    if (match_number(tok)) return {make_special(TokenKind::Number, raw)};

    if (auto ext = file_extension(tok))
        return {make_special(TokenKind::File, raw), make_ext(*ext, raw)};

    auto in = [&](const std::vector<std::string>& list) {
        return std::find(list.begin(), list.end(), tok) != list.end();
    };
    if (in(keywords_.malicious)) return {make_special(TokenKind::MalKeyword, raw)};
    if (in(keywords_.benign)) return {make_special(TokenKind::BenignKeyword, raw)};

    return {make_word(tok, raw)};
}

std::vector<Token> Lexer::apply_patterns(const std::string& normalized) const {
    const std::string& raw = normalized;

    if (rundll32_patterns_) {
        if (normalized.rfind("javascript:", 0) == 0)
            return {make_special(TokenKind::Javascript, raw)};
        std::smatch m;
        if (std::regex_match(normalized, m, dll_entry_re())) {
            // <dll> * * : the DLL path and the entrypoint follow as words
            std::vector<Token> out{make_special(TokenKind::Dll, raw)};
            for (const auto& part : {m[1].str(), m[2].str()})
                if (std::string word = normalize(part); !word.empty())
                    out.push_back(make_word(std::move(word), raw));
            return out;
        }
    }

    if (regsvr32_patterns_) {
        std::smatch m;
        if (std::regex_match(normalized, m, script_re())) {
            // <script> * : the payload runs back through the common cascade
            std::vector<Token> out{make_special(TokenKind::Script, raw)};
            if (const std::string payload = normalize(m[1].str()); !payload.empty())
                for (Token& t : apply_common(payload, raw)) out.push_back(std::move(t));
            return out;
        }
    }

    return apply_common(normalized, raw);
}

TokenizedCommand Lexer::tokenize(const RawCommand& cmd) const {
    TokenizedCommand out;
    out.binary = binary_;

    std::vector<std::string> raw_tokens = split_raw(cmd.command_line);
    std::size_t first = 0;
    if (!raw_tokens.empty() && program_name(raw_tokens.front()) == binary_)
        first = 1; // the program-path token carries no per-command signal

    for (std::size_t i = first; i < raw_tokens.size(); ++i) {
        std::string norm = normalize(raw_tokens[i]);
        if (norm.empty()) continue;
        for (Token& t : apply_patterns(norm)) {
            t.raw = raw_tokens[i];
            out.tokens.push_back(std::move(t));
        }
    }
    return out;
}

LexerRegistry::LexerRegistry() {
    for (const std::string& name : default_binaries()) lexers_.emplace(name, Lexer(name));
}

const std::vector<std::string>& LexerRegistry::default_binaries() {
    static const std::vector<std::string> names = {
        "bitsadmin", "certutil", "cmstp",    "csc",      "cscript",  "mmc",
        "msiexec",   "msxsl",    "reg",      "regsvcs",  "regsvr32", "rundll32",
        "schtasks",  "sqlps",    "wmic",     "wscript",
    };
    return names;
}

bool LexerRegistry::supported(std::string_view name) const {
    return lexers_.find(name) != lexers_.end();
}

const Lexer& LexerRegistry::lexer_for(std::string_view name) const {
    auto it = lexers_.find(name);
    if (it == lexers_.end()) throw UnsupportedBinaryError(std::string(name));
    return it->second;
}

std::vector<std::string> LexerRegistry::binaries() const {
    std::vector<std::string> names;
    names.reserve(lexers_.size());
    for (const auto& [name, _] : lexers_) names.push_back(name);
    return names;
}

void LexerRegistry::register_binary(const std::string& name) {
    lexers_.emplace(name, Lexer(name));
}

void LexerRegistry::set_keywords(const std::string& binary, KeywordLists keywords) {
    auto it = lexers_.find(binary);
    if (it == lexers_.end()) throw UnsupportedBinaryError(binary);
    it->second = Lexer(binary, std::move(keywords));
}

void LexerRegistry::load_keywords_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".toml") continue;
        const std::string binary = to_lower(entry.path().stem().string());
        if (binary.empty()) continue;
        register_binary(binary); // a keyword file for a fresh name registers it
        set_keywords(binary, parse_keyword_file(entry.path()));
    }
}

TokenizedCommand LexerRegistry::tokenize(const RawCommand& cmd) const {
    return lexer_for(cmd.binary_name).tokenize(cmd);
}

std::vector<Token> apply_patterns(const std::string& normalized_token, const std::string& binary) {
    static const LexerRegistry registry;
    if (registry.supported(binary)) return registry.lexer_for(binary).apply_patterns(normalized_token);
    return Lexer(binary).apply_patterns(normalized_token);
}

TokenizedCommand tokenize(const RawCommand& cmd) {
    static const LexerRegistry registry;
    return registry.tokenize(cmd);
}

} // namespace lolguard
