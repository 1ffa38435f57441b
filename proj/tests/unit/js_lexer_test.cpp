#include <gtest/gtest.h>

#include "pilotgen/js_lexer.hpp"

using namespace pilotgen;
using js::TokenKind;

namespace {

std::vector<TokenKind> kinds(std::string_view src) {
    std::vector<TokenKind> out;
    for (const auto& t : js::tokenize(src).tokens) out.push_back(t.kind);
    return out;
}

}  // namespace

TEST(Lexer, BasicTokens) {
    const std::string src = "let x = f('a', 1.5e3); // done";
    const auto r = js::tokenize(src);
    ASSERT_FALSE(r.error);
    ASSERT_EQ(r.tokens.size(), 11u);
    EXPECT_EQ(r.tokens[0].text(src), "let");
    EXPECT_EQ(r.tokens[5].kind, TokenKind::String);
    EXPECT_EQ(r.tokens[7].text(src), "1.5e3");
    EXPECT_EQ(r.tokens.back().kind, TokenKind::LineComment);
    EXPECT_EQ(r.tokens.back().text(src), "// done");
}

TEST(Lexer, RegexVersusDivision) {
    EXPECT_EQ(kinds("a = /x+/g;"), (std::vector{TokenKind::Identifier, TokenKind::Punctuator, TokenKind::Regex,
                                              TokenKind::Punctuator}));
    EXPECT_EQ(kinds("a = b / c / d;"),
              (std::vector{TokenKind::Identifier, TokenKind::Punctuator, TokenKind::Identifier, TokenKind::Punctuator,
                           TokenKind::Identifier, TokenKind::Punctuator, TokenKind::Identifier, TokenKind::Punctuator}));
    EXPECT_EQ(kinds("return /a/.test(s)")[1], TokenKind::Regex);
}

TEST(Lexer, TemplatesWithSubstitutions) {
    const std::string src = "`a ${ {b: `c`}.b } d` + 1";
    const auto r = js::tokenize(src);
    ASSERT_FALSE(r.error);
    EXPECT_EQ(r.tokens[0].kind, TokenKind::Template);
    EXPECT_EQ(r.tokens[0].text(src), "`a ${");
    const auto& tail = r.tokens[r.tokens.size() - 3];
    EXPECT_EQ(tail.kind, TokenKind::Template);
    EXPECT_EQ(tail.text(src), "} d`");
    EXPECT_EQ(r.tokens.back().text(src), "1");
}

TEST(Lexer, CommentsAndNewlines) {
    const std::string src = "a /* x\n y */\nb";
    const auto r = js::tokenize(src);
    ASSERT_EQ(r.tokens.size(), 3u);
    EXPECT_EQ(r.tokens[1].kind, TokenKind::BlockComment);
    EXPECT_TRUE(r.tokens[1].isComment());
    EXPECT_TRUE(r.tokens[2].newlineBefore);
    EXPECT_FALSE(r.tokens[1].newlineBefore);
}

TEST(Lexer, UnterminatedLiteralsReportErrors) {
    EXPECT_TRUE(js::tokenize("let s = 'abc").error);
    EXPECT_TRUE(js::tokenize("/* open").error);
    EXPECT_TRUE(js::tokenize("`abc ${").error);
    const auto r = js::tokenize("x; 'oops");
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->offset, 3u);
    EXPECT_EQ(r.tokens.size(), 2u);
}

TEST(Lexer, Keywords) {
    EXPECT_TRUE(js::is_keyword("function"));
    EXPECT_TRUE(js::is_keyword("return"));
    EXPECT_FALSE(js::is_keyword("describe"));
}

TEST(Lexer, MatchingBracketSkipsComments) {
    const std::string src = "f(a, /* ) */ [b], {c: (d)})";
    const auto r = js::tokenize(src);
    const auto close = js::matching_bracket(r.tokens, src, 1);
    ASSERT_TRUE(close);
    EXPECT_EQ(*close, r.tokens.size() - 1);
    EXPECT_FALSE(js::matching_bracket(js::tokenize("f(a").tokens, "f(a", 1));
}

TEST(Lexer, FindCallsIgnoresMemberCalls) {
    const std::string src = "it('a', f); x.it('b'); it ('c', g);";
    const auto r = js::tokenize(src);
    const auto calls = js::find_calls(r.tokens, src, "it");
    ASSERT_EQ(calls.size(), 2u);
    EXPECT_EQ(r.tokens[calls[1].open].begin, src.find("('c'"));
    EXPECT_EQ(r.tokens[calls[0].close].text(src), ")");
}
