#include <gtest/gtest.h>

#include <stdexcept>

#include "pilotgen/model.hpp"

using namespace pilotgen;

TEST(AccessPath, RendersPropertiesAndIndices) {
    AccessPath p{"quill-delta", {std::string("prototype"), std::string("concat")}};
    EXPECT_EQ(render_access_path(p), "quill-delta.prototype.concat");
    EXPECT_EQ(render_access_path(AccessPath{"pkg", {std::uint64_t{0}}}), "pkg[0]");
    EXPECT_EQ(render_access_path(AccessPath{"pkg", {std::string("a"), std::string("12")}}), "pkg.a[12]");
    EXPECT_EQ(render_access_path(AccessPath{"pkg", {}}), "pkg");
}

TEST(AccessPath, TerminalName) {
    EXPECT_EQ(AccessPath{"pkg"}.terminalName(), "pkg");
    EXPECT_EQ((AccessPath{"pkg", {std::string("getCountry")}}.terminalName()), "getCountry");
    EXPECT_FALSE((AccessPath{"pkg", {std::uint64_t{3}}}.terminalName()));
}

TEST(AccessPath, ExtendedLeavesOriginal) {
    const AccessPath root{"pkg"};
    const auto child = root.extended(std::string("f")).extended(std::uint64_t{1});
    EXPECT_TRUE(root.components.empty());
    EXPECT_EQ(render_access_path(child), "pkg.f[1]");
    EXPECT_LT(root, child);
}

TEST(Refiners, ParseAcceptsDisplayAndShortNames) {
    EXPECT_EQ(parse_refiner("FnBody"), RefinerKind::FnBody);
    EXPECT_EQ(parse_refiner("FnBodyIncluder"), RefinerKind::FnBody);
    EXPECT_EQ(parse_refiner("doccomment"), RefinerKind::DocComment);
    EXPECT_EQ(parse_refiner("SnippetIncluder"), RefinerKind::Snippet);
    EXPECT_EQ(parse_refiner("RetryWithError"), RefinerKind::RetryWithError);
    EXPECT_FALSE(parse_refiner("Nope"));
}

TEST(Refiners, SetEnableDisable) {
    auto set = RefinerSet::all();
    EXPECT_TRUE(set.contains(RefinerKind::Snippet));
    set.disable(RefinerKind::Snippet);
    EXPECT_FALSE(set.contains(RefinerKind::Snippet));
    EXPECT_TRUE(set.contains(RefinerKind::FnBody));
    EXPECT_FALSE(RefinerSet{}.contains(RefinerKind::FnBody));
    EXPECT_EQ(RefinerSet{}.enable(RefinerKind::Snippet).disable(RefinerKind::Snippet), RefinerSet{});
}

TEST(Prompt, FlagsMustMatchMetadata) {
    Prompt p;
    p.target.accessPath = AccessPath{"pkg", {std::string("f")}};
    EXPECT_NO_THROW(validate_prompt_flags(p));
    p.includeBody = true;
    EXPECT_THROW(validate_prompt_flags(p), std::invalid_argument);
    p.target.sourceText = "function f() {}";
    EXPECT_NO_THROW(validate_prompt_flags(p));
    p.includeSnippets = true;
    EXPECT_THROW(validate_prompt_flags(p), std::invalid_argument);
    p.includeSnippets = false;
    p.includeDocComment = true;
    EXPECT_THROW(validate_prompt_flags(p), std::invalid_argument);
}

TEST(Status, RoundTrip) {
    for (auto s : {TestStatus::Pass, TestStatus::AssertionFailure, TestStatus::Crash, TestStatus::Timeout,
                   TestStatus::InvalidSyntax}) {
        EXPECT_EQ(parse_test_status(to_string(s)), s);
    }
    EXPECT_FALSE(parse_test_status("passed"));
}

TEST(Coverage, CoveredSetsAndTotals) {
    CoverageData c;
    c.perFile["a.js"].statementHits = {{"0", 1}, {"1", 0}};
    c.perFile["a.js"].branchHits = {{"0.0", 0}, {"0.1", 2}};
    c.perFile["b.js"].statementHits = {{"0", 3}};
    EXPECT_EQ(c.coveredStatements(), (std::set<std::string>{"a.js#0", "b.js#0"}));
    EXPECT_EQ(c.coveredBranches(), (std::set<std::string>{"a.js#0.1"}));
    EXPECT_EQ(c.totalStatements(), 3u);
    EXPECT_EQ(c.totalBranches(), 2u);
}

TEST(Candidate, EqualityIsByNormalizedSource) {
    CandidateTest a{"x", "raw a", {"p1"}, AccessPath{"pkg"}};
    CandidateTest b{"x", "raw b", {"p2"}, AccessPath{"other"}};
    EXPECT_EQ(a, b);
    b.normalizedSource = "y";
    EXPECT_NE(a, b);
}
