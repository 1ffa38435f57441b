#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

#include "pilotgen/prompt_engine.hpp"

using namespace pilotgen;

namespace {

ApiFunction concat() {
    ApiFunction fn;
    fn.accessPath = AccessPath{"quill-delta", {std::string("prototype"), std::string("concat")}};
    fn.paramNames = {"other"};
    return fn;
}

ApiFunction rich() {
    ApiFunction fn;
    fn.accessPath = AccessPath{"pkg", {std::string("f")}};
    fn.paramNames = {"a", "a"};
    fn.sourceText = "function f(a, a) {\n  return a;\n}";
    fn.docComment = "/**\n * Doc.\n */";
    fn.snippets = {Snippet{"pkg.f(1);", "README.md", 0, 0}, Snippet{"pkg.f(2);", "README.md", 1, 0}};
    return fn;
}

}  // namespace

TEST(PutIdentifier, ReplacesNonIdentifierCharacters) {
    EXPECT_EQ(prompts::put_identifier("countries-and-timezones"), "countries_and_timezones");
    EXPECT_EQ(prompts::put_identifier("@scope/pkg.js"), "_scope_pkg_js");
    EXPECT_EQ(prompts::put_identifier("7zip"), "_7zip");
}

TEST(Signature, KeepsDuplicateParameters) {
    EXPECT_EQ(prompts::render_signature(rich()), "// pkg.f(a, a)\n");
    EXPECT_EQ(prompts::render_signature(concat()), "// quill-delta.prototype.concat(other)\n");
}

TEST(Metadata, FixedOrderSnippetsDocBody) {
    auto p = prompts::make_base_prompt(rich());
    p.includeBody = p.includeDocComment = p.includeSnippets = true;
    p.snippetLimit = 2;
    EXPECT_EQ(prompts::render_metadata_block(p),
              "// usage #1\n"
              "// pkg.f(1);\n"
              "// usage #2\n"
              "// pkg.f(2);\n"
              "// /**\n"
              "//  * Doc.\n"
              "//  */\n"
              "// function f(a, a) {\n"
              "//   return a;\n"
              "// }\n"
              "// pkg.f(a, a)\n");
}

TEST(RetryPrompt, FollowsRefinementLayout) {
    const std::string failing =
        "    it('test quill-delta.prototype.concat', function(done) {\n"
        "        let delta3 = delta1.concat(delta2);\n"
        "        assert.equal(delta3.ops.length, 6);\n"
        "        done();\n"
        "    })";
    const auto retry = prompts::make_retry_prompt(prompts::make_base_prompt(concat()), failing, "expected 5 to equal 6");
    EXPECT_EQ(retry.renderedText,
              "let mocha = require('mocha');\n"
              "let assert = require('assert');\n"
              "let quill_delta = require('quill-delta');\n"
              "// quill-delta.prototype.concat(other)\n"
              "describe('test quill_delta', function() {\n"
              "    it('test quill-delta.prototype.concat', function(done) {\n"
              "        let delta3 = delta1.concat(delta2);\n"
              "        assert.equal(delta3.ops.length, 6);\n"
              "        done();\n"
              "    })\n"
              "\n"
              "    // the test above fails with the following error:\n"
              "    //   expected 5 to equal 6\n"
              "    // fixed test:\n"
              "    it('test quill_delta', function(done) {\n");
    EXPECT_EQ(prompts::candidate_prefix(retry),
              "let mocha = require('mocha');\n"
              "let assert = require('assert');\n"
              "let quill_delta = require('quill-delta');\n"
              "// quill-delta.prototype.concat(other)\n"
              "describe('test quill_delta', function() {\n"
              "    it('test quill_delta', function(done) {\n");
    EXPECT_THROW(prompts::make_retry_prompt(retry, failing, "x"), std::invalid_argument);
}

TEST(RetryPrompt, MultiLineErrorsAreCommentedLineByLine) {
    const auto text = prompts::render_retry_prompt(prompts::make_base_prompt(concat()), "it('x', f);", "line one\nline two");
    EXPECT_NE(text.find("    //   line one\n    //   line two\n"), std::string::npos);
}

TEST(ExtractIt, WholeLinesThroughClosingParen) {
    const std::string src =
        "describe('s', function() {\n"
        "    it('a', function(done) {\n"
        "        f(')');\n"
        "        done();\n"
        "    });\n"
        "    it('b', function() {});\n"
        "});\n";
    EXPECT_EQ(prompts::extract_it_block(src),
              "    it('a', function(done) {\n        f(')');\n        done();\n    });");
    EXPECT_FALSE(prompts::extract_it_block("describe('x', function() {});"));
    EXPECT_FALSE(prompts::extract_it_block("it('unterminated"));
}

TEST(Enumerate, AllSubsetsInPassOrder) {
    const auto plan = prompts::enumerate_prompts(rich(), RefinerSet::all());
    ASSERT_EQ(plan.combinations.size(), 8u);
    const auto& c = plan.combinations;
    EXPECT_FALSE(c[0].includeBody || c[0].includeSnippets || c[0].includeDocComment);
    EXPECT_TRUE(c[1].includeBody && !c[1].includeSnippets);
    EXPECT_TRUE(c[2].includeSnippets && !c[2].includeBody);
    EXPECT_TRUE(c[3].includeSnippets && c[3].includeBody);
    for (std::size_t i = 4; i < 8; ++i) EXPECT_TRUE(c[i].includeDocComment);
    std::set<std::string> texts;
    for (const auto& p : c) {
        EXPECT_FALSE(p.isRetry());
        texts.insert(p.renderedText);
    }
    EXPECT_EQ(texts.size(), 8u);
}

TEST(Enumerate, OnlyApplicableRefiners) {
    auto fn = rich();
    fn.docComment.reset();
    fn.snippets.clear();
    EXPECT_EQ(prompts::enumerate_prompts(fn, RefinerSet::all()).combinations.size(), 2u);
    EXPECT_EQ(prompts::enumerate_prompts(concat(), RefinerSet::all()).combinations.size(), 1u);
    EXPECT_EQ(prompts::enumerate_prompts(rich(), RefinerSet{}).combinations.size(), 1u);
}

TEST(Enumerate, BasePromptsOfAllTargetsComeFirst) {
    const auto all = prompts::enumerate_prompts(std::vector<ApiFunction>{rich(), concat()}, RefinerSet::all());
    ASSERT_EQ(all.size(), 9u);
    EXPECT_EQ(all[1].target.accessPath, concat().accessPath);
    EXPECT_FALSE(all[1].includeBody);
}

TEST(Truncate, DropsTrailingSnippetsButKeepsOne) {
    auto p = prompts::make_base_prompt(rich());
    p.includeSnippets = true;
    p.snippetLimit = 2;
    prompts::render_into(p);
    const auto full = p.renderedText.size();
    EXPECT_EQ(prompts::truncate_to_budget(p, 0), 0u);
    EXPECT_EQ(prompts::truncate_to_budget(p, full), 0u);
    EXPECT_EQ(prompts::truncate_to_budget(p, full - 1), 1u);
    EXPECT_EQ(p.snippetLimit, 1u);
    EXPECT_EQ(p.renderedText.find("usage #2"), std::string::npos);
    EXPECT_EQ(prompts::truncate_to_budget(p, 10), 0u);
    EXPECT_EQ(p.snippetLimit, 1u);
}
