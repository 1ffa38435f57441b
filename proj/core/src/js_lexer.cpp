#include "pilotgen/js_lexer.hpp"

#include <algorithm>
#include <array>

namespace pilotgen::js {

namespace {

constexpr std::array<std::string_view, 46> kKeywords = {
    "async",  "await",   "break",    "case",     "catch",  "class", "const",  "continue", "debugger",
    "default", "delete", "do",       "else",     "export", "extends", "false", "finally", "for",
    "function", "if",    "import",   "in",       "instanceof", "let", "new",  "null",     "of",
    "return", "static",  "super",    "switch",   "this",   "throw", "true",   "try",      "typeof",
    "undefined", "var",  "void",     "while",    "with",   "yield", "get",    "set",      "from",
    "as"};

// Keywords after which a `/` starts a regular expression.
constexpr std::array<std::string_view, 14> kRegexKeywords = {
    "return", "typeof", "instanceof", "in", "of", "new", "delete", "void",
    "throw",  "case",   "do",         "else", "yield", "await"};

// Longest first so that the greedy match below works.
constexpr std::array<std::string_view, 51> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",
    "+=",   "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  "**",  "<<",  ">>",
    "{",    "}",   "(",   ")",   "[",   "]",   ";",   ",",   "<",   ">",   "+",
    "-",    "*",   "%",   "&",   "|",   "^",   "!"};

constexpr std::string_view kSinglePunct = "~?:=./@";

bool ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c == '#' || c >= 0x80;
}

bool ident_part(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

constexpr const char* kUnterminatedTemplate = "unterminated template literal";

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    LexResult run() {
        LexResult result;
        if (src_.substr(0, 2) == "#!") {
            const auto end = std::min(src_.find('\n'), src_.size());
            push(result, TokenKind::LineComment, 0, end);
            pos_ = end;
        }
        while (true) {
            skip_whitespace();
            if (pos_ >= src_.size()) break;
            if (!next(result)) break;
        }
        if (!result.error && std::find(braces_.begin(), braces_.end(), true) != braces_.end()) {
            fail(result, src_.size(), kUnterminatedTemplate);
        }
        return result;
    }

private:
    void push(LexResult& r, TokenKind kind, std::size_t begin, std::size_t end) {
        r.tokens.push_back(Token{kind, begin, end, newline_});
        newline_ = false;
        if (kind != TokenKind::LineComment && kind != TokenKind::BlockComment) last_ = r.tokens.size() - 1;
    }

    void skip_whitespace() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                newline_ = true;
            } else if (c != ' ' && c != '\t' && c != '\r' && c != '\v' && c != '\f') {
                // U+00A0 and U+FEFF show up in pasted docs.
                if (src_.substr(pos_, 2) == "\xC2\xA0") { pos_ += 2; continue; }
                if (src_.substr(pos_, 3) == "\xEF\xBB\xBF") { pos_ += 3; continue; }
                return;
            }
            ++pos_;
        }
    }

    bool fail(LexResult& r, std::size_t at, std::string message) {
        r.error.emplace();
        r.error->offset = at;
        r.error->message = std::move(message);
        return false;
    }

    bool regex_allowed(const LexResult& r) const {
        if (!last_) return true;
        const Token& t = r.tokens[*last_];
        const auto text = t.text(src_);
        switch (t.kind) {
            case TokenKind::Punctuator: return text != ")" && text != "]";
            case TokenKind::Identifier:
                return std::find(kRegexKeywords.begin(), kRegexKeywords.end(), text) != kRegexKeywords.end();
            case TokenKind::Template: return text.back() != '`';
            default: return false;
        }
    }

    bool next(LexResult& r) {
        const std::size_t start = pos_;
        const unsigned char c = static_cast<unsigned char>(src_[pos_]);

        if (src_.substr(pos_, 2) == "//") {
            const auto end = src_.find('\n', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end;
            push(r, TokenKind::LineComment, start, pos_);
            return true;
        }
        if (src_.substr(pos_, 2) == "/*") {
            const auto end = src_.find("*/", pos_ + 2);
            if (end == std::string_view::npos) return fail(r, start, "unterminated block comment");
            pos_ = end + 2;
            const bool multiline = src_.substr(start, pos_ - start).find('\n') != std::string_view::npos;
            push(r, TokenKind::BlockComment, start, pos_);
            if (multiline) newline_ = true;
            return true;
        }
        if (c == '\'' || c == '"') return string_literal(r, static_cast<char>(c));
        if (c == '`') {
            ++pos_;
            return template_part(r, start);
        }
        if (c == '}' && !braces_.empty() && braces_.back()) {
            braces_.pop_back();
            ++pos_;
            return template_part(r, start);
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            number(r);
            return true;
        }
        if (ident_start(c) || c == '\\') {
            ++pos_;
            while (pos_ < src_.size() && (ident_part(src_[pos_]) || src_[pos_] == '\\')) ++pos_;
            push(r, TokenKind::Identifier, start, pos_);
            return true;
        }
        if (c == '/' && regex_allowed(r)) return regex(r);

        for (auto p : kPunctuators) {
            if (src_.substr(pos_, p.size()) == p) {
                if (p == "{") braces_.push_back(false);
                if (p == "}" && !braces_.empty()) braces_.pop_back();
                pos_ += p.size();
                push(r, TokenKind::Punctuator, start, pos_);
                return true;
            }
        }
        if (kSinglePunct.find(static_cast<char>(c)) != std::string_view::npos) {
            ++pos_;
            push(r, TokenKind::Punctuator, start, pos_);
            return true;
        }
        return fail(r, start, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }

    bool string_literal(LexResult& r, char quote) {
        const std::size_t start = pos_++;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            if (c == '\n') return fail(r, start, "unterminated string literal");
            ++pos_;
            if (c == quote) {
                push(r, TokenKind::String, start, pos_);
                return true;
            }
        }
        return fail(r, start, "unterminated string literal");
    }

    // Scans from just after '`' or the '}' closing a substitution.
    bool template_part(LexResult& r, std::size_t start) {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            if (c == '`') {
                ++pos_;
                push(r, TokenKind::Template, start, pos_);
                return true;
            }
            if (c == '$' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '{') {
                pos_ += 2;
                braces_.push_back(true);
                push(r, TokenKind::Template, start, pos_);
                return true;
            }
            ++pos_;
        }
        return fail(r, start, kUnterminatedTemplate);
    }

    void number(LexResult& r) {
        const std::size_t start = pos_;
        const bool hex = src_.substr(pos_, 2) == "0x" || src_.substr(pos_, 2) == "0X";
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (ident_part(c) || c == '.') {
                ++pos_;
                if (!hex && (c == 'e' || c == 'E') && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                    ++pos_;
                }
                continue;
            }
            break;
        }
        push(r, TokenKind::Number, start, pos_);
    }

    bool regex(LexResult& r) {
        const std::size_t start = pos_++;
        bool inClass = false;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') return fail(r, start, "unterminated regular expression");
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == '[') inClass = true;
            else if (c == ']') inClass = false;
            else if (c == '/' && !inClass) {
                while (pos_ < src_.size() && ident_part(src_[pos_])) ++pos_;
                push(r, TokenKind::Regex, start, pos_);
                return true;
            }
        }
        return fail(r, start, "unterminated regular expression");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    bool newline_ = false;
    std::optional<std::size_t> last_;
    std::vector<bool> braces_;  // true: the brace closes a template substitution
};

bool opens(const Token& t, std::string_view src) {
    const auto text = t.text(src);
    if (t.kind == TokenKind::Punctuator) return text == "(" || text == "[" || text == "{";
    return t.kind == TokenKind::Template && text.size() >= 2 && text.substr(text.size() - 2) == "${";
}

bool closes(const Token& t, std::string_view src) {
    const auto text = t.text(src);
    if (t.kind == TokenKind::Punctuator) return text == ")" || text == "]" || text == "}";
    return t.kind == TokenKind::Template && text.front() == '}';
}

}  // namespace

LexResult tokenize(std::string_view source) { return Lexer(source).run(); }

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::optional<std::size_t> matching_bracket(const std::vector<Token>& tokens, std::string_view source,
                                            std::size_t open) {
    if (open >= tokens.size() || !opens(tokens[open], source)) return std::nullopt;
    int depth = 0;
    for (std::size_t i = open; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.isComment()) continue;
        if (closes(t, source) && i != open) {
            if (--depth == 0) return i;
        }
        if (opens(t, source)) ++depth;
    }
    return std::nullopt;
}

std::vector<CallSite> find_calls(const std::vector<Token>& tokens, std::string_view source, std::string_view name) {
    std::vector<CallSite> calls;
    std::optional<std::size_t> previous;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.isComment()) continue;
        const bool afterDot = previous && tokens[*previous].kind == TokenKind::Punctuator &&
                              (tokens[*previous].text(source) == "." || tokens[*previous].text(source) == "?.");
        if (t.kind == TokenKind::Identifier && t.text(source) == name && !afterDot) {
            std::size_t j = i + 1;
            while (j < tokens.size() && tokens[j].isComment()) ++j;
            if (j < tokens.size() && tokens[j].kind == TokenKind::Punctuator && tokens[j].text(source) == "(") {
                if (auto close = matching_bracket(tokens, source, j)) calls.push_back({i, j, *close});
            }
        }
        previous = i;
    }
    return calls;
}

}  // namespace pilotgen::js
