#pragma once

// A small JavaScript tokenizer. It knows enough about the language to find
// comments, string/template/regex literals and bracket structure in test
// source; it is not a parser.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pilotgen::js {

enum class TokenKind {
    Identifier,
    Number,
    String,
    Template,
    Regex,
    Punctuator,
    LineComment,
    BlockComment,
};

struct Token {
    TokenKind kind;
    std::size_t begin;
    std::size_t end;  // one past the last byte
    bool newlineBefore;

    std::string_view text(std::string_view source) const { return source.substr(begin, end - begin); }
    bool isComment() const { return kind == TokenKind::LineComment || kind == TokenKind::BlockComment; }
};

struct LexError {
    std::size_t offset;
    std::string message;
};

struct LexResult {
    std::vector<Token> tokens;
    std::optional<LexError> error;  // tokens are valid up to the error
};

/// Never throws. Unterminated literals and comments set `error`.
LexResult tokenize(std::string_view source);

bool is_keyword(std::string_view word);

/// Index of the token closing the bracket at `open`, skipping comments.
std::optional<std::size_t> matching_bracket(const std::vector<Token>& tokens, std::string_view source,
                                            std::size_t open);

/// A call `name(...)` found in source: token indices of the callee and the
/// opening and closing parentheses.
struct CallSite {
    std::size_t callee;
    std::size_t open;
    std::size_t close;
};

/// Calls of a bare identifier `name(` (not `x.name(`), in source order.
std::vector<CallSite> find_calls(const std::vector<Token>& tokens, std::string_view source, std::string_view name);

}  // namespace pilotgen::js
