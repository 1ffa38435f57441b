#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "fake_harness.hpp"
#include "pilotgen/errors.hpp"
#include "pilotgen/harness.hpp"

using namespace pilotgen;
using namespace pilotgen::harness;
using nlohmann::json;

namespace {

const std::string kFixture = std::string(PILOTGEN_FIXTURE_DIR) + "/mini-pkg/fake-harness.json";

const std::string kPassing =
    "let mocha = require('mocha');\n"
    "let assert = require('assert');\n"
    "let mini_pkg = require('mini-pkg');\n"
    "describe('test suite', function() {\n"
    "    it('test case', function(done) {\n"
    "        let sum = mini_pkg.add(2, 3);\n"
    "        assert.equal(sum, 5);\n"
    "        done();\n"
    "    });\n"
    "});\n";

std::string with_body(const std::string& body) {
    return "let mini_pkg = require('mini-pkg');\n"
           "describe('test suite', function() {\n"
           "    it('test case', function(done) {\n" +
           body + "    });\n});\n";
}

}  // namespace

TEST(Protocol, AccessPathRoundTrip) {
    const AccessPath p{"pkg", {std::string("a"), std::uint64_t{2}, std::string("b")}};
    const json j = p;
    EXPECT_EQ(j.get<AccessPath>(), p);
    EXPECT_THROW(json::parse(R"({"package": "p", "components": [-1]})").get<AccessPath>(), std::exception);
}

TEST(Protocol, ExploreResultRoundTrip) {
    ExploreResult r;
    ExploredFunction f;
    f.function.accessPath = AccessPath{"pkg", {std::string("f")}};
    f.function.paramNames = {"x", "y"};
    f.function.sourceText = "function f(x, y) {}";
    f.function.sourceRange = SourceRange{"index.js", 3, 4};
    f.docCommentCandidate = "/** f */";
    r.functions.push_back(f);
    r.skippedGetters = 2;
    const auto back = json(r).get<ExploreResult>();
    ASSERT_EQ(back.functions.size(), 1u);
    EXPECT_EQ(back.functions[0].function, f.function);
    EXPECT_EQ(back.functions[0].docCommentCandidate, f.docCommentCandidate);
    EXPECT_EQ(back.skippedGetters, 2);
}

TEST(Protocol, CheckAndAnalysisRoundTrip) {
    CheckResult c;
    c.valid = true;
    c.repaired = "x()";
    c.edits.comments = {{0, 2}};
    c.edits.itArgs = {{3, 5}};
    c.statementBoundaries = {4, 9};
    const auto cb = json(c).get<CheckResult>();
    EXPECT_EQ(cb.repaired, c.repaired);
    EXPECT_EQ(cb.edits, c.edits);
    EXPECT_EQ(cb.statementBoundaries, c.statementBoundaries);

    AnalysisFacts a;
    a.statements = {{"s1", {"x"}, {"pkg"}, false, true}, {"s2", {}, {"assert", "x"}, true, false}};
    a.orderEdges = {{"s1", "s2"}};
    const auto ab = json(a).get<AnalysisFacts>();
    ASSERT_EQ(ab.statements.size(), 2u);
    EXPECT_EQ(ab.statements[1].uses, a.statements[1].uses);
    EXPECT_TRUE(ab.statements[0].importsPut);
    EXPECT_EQ(ab.orderEdges, a.orderEdges);
}

TEST(Protocol, RunResultStatuses) {
    RunResult r;
    r.status = RunStatus::Timeout;
    r.errorMessage = "slow";
    r.durationMs = 2000;
    const auto back = json(r).get<RunResult>();
    EXPECT_EQ(back.status, RunStatus::Timeout);
    EXPECT_EQ(back.errorMessage, "slow");
    EXPECT_FALSE(back.coverageReport);
    EXPECT_THROW(json::parse(R"({"status": "exploded"})").get<RunResult>(), std::invalid_argument);
    EXPECT_EQ(to_test_status(RunStatus::AssertionFailure), TestStatus::AssertionFailure);
}

TEST(FakeHarness, ExploreListsFixtureApi) {
    auto h = pilotgen::testing::FakeHarness::from_file(kFixture);
    const auto r = h.explore({"mini-pkg", "mini-pkg", true});
    ASSERT_EQ(r.functions.size(), 5u);
    std::vector<std::string> paths;
    for (const auto& f : r.functions) paths.push_back(render_access_path(f.function.accessPath));
    EXPECT_EQ(paths, (std::vector<std::string>{"mini-pkg.add", "mini-pkg.lookup", "mini-pkg.zip",
                                               "mini-pkg.helpers[0]", "mini-pkg.helpers[1]"}));
    EXPECT_EQ(h.calls("explore"), 1u);
}

TEST(FakeHarness, ExploreErrorBecomesExplorationFailure) {
    pilotgen::testing::FakeHarness h(json{{"exploreError", {{"kind", "LoadError"}, {"message", "Cannot find module"}}}});
    try {
        h.explore({"x", "x", true});
        FAIL();
    } catch (const ExplorationFailure& e) {
        EXPECT_NE(std::string(e.what()).find("Cannot find module"), std::string::npos);
    }
}

TEST(FakeHarness, CheckRepairsMissingClosers) {
    auto h = pilotgen::testing::FakeHarness::from_file(kFixture);
    const std::string open = "describe('s', function() {\n    it('c', function(done) {\n        done();\n";
    const auto r = h.check(open);
    EXPECT_TRUE(r.valid);
    ASSERT_TRUE(r.repaired);
    EXPECT_EQ(*r.repaired, open + "})})");

    const auto ok = h.check(kPassing);
    EXPECT_TRUE(ok.valid);
    EXPECT_FALSE(ok.repaired);
    EXPECT_EQ(ok.edits.itArgs.size(), 1u);
    EXPECT_FALSE(ok.statementBoundaries.empty());

    EXPECT_FALSE(h.check("I am not sure what this function does.\n").valid);
    EXPECT_FALSE(h.check("f(]").valid);
}

TEST(FakeHarness, RunStatuses) {
    auto h = pilotgen::testing::FakeHarness::from_file(kFixture);
    auto run = [&](const std::string& src) { return h.run(RunRequest{src, 2000, true, "mini-pkg"}); };

    const auto pass = run(kPassing);
    EXPECT_EQ(pass.status, RunStatus::Pass);
    ASSERT_TRUE(pass.coverageReport);

    const auto fail = run(with_body("        let value = mini_pkg.lookup({a: 1}, 'a');\n"
                                    "        assert.equal(value, 2);\n        done();\n"));
    EXPECT_EQ(fail.status, RunStatus::AssertionFailure);
    EXPECT_EQ(fail.errorMessage, "AssertionError [ERR_ASSERTION]: 1 == 2");

    const auto twice = run(with_body("        done();\n        done();\n"));
    EXPECT_EQ(twice.status, RunStatus::Crash);

    const auto slow = run(with_body("        mini_pkg.add(1, 1);\n"));
    EXPECT_EQ(slow.status, RunStatus::Timeout);
    EXPECT_EQ(slow.durationMs, 2000);
}

TEST(FakeHarness, AnalyzeMarksImportsAndAssertions) {
    auto h = pilotgen::testing::FakeHarness::from_file(kFixture);
    const auto facts = h.analyze(kPassing, "mini-pkg");
    bool importSeen = false, assertionUsesSum = false;
    for (const auto& s : facts.statements) {
        if (s.importsPut && std::find(s.defs.begin(), s.defs.end(), "mini_pkg") != s.defs.end()) importSeen = true;
        if (s.isAssertion && std::find(s.uses.begin(), s.uses.end(), "sum") != s.uses.end()) assertionUsesSum = true;
    }
    EXPECT_TRUE(importSeen);
    EXPECT_TRUE(assertionUsesSum);
}

TEST(ProcessHarness, SpeaksProtocolOverPipes) {
    ProcessHarness h(std::string(PILOTGEN_FAKE_HARNESS) + " --fixture " + kFixture);
    EXPECT_EQ(h.explore({"mini-pkg", "mini-pkg", true}).functions.size(), 5u);
    EXPECT_TRUE(h.check(kPassing).valid);
    EXPECT_EQ(h.run(RunRequest{kPassing, 2000, true, "mini-pkg"}).status, RunStatus::Pass);
}

TEST(ProcessHarness, ExitReportsStderrTail) {
    ProcessHarness h("sh -c 'read line; echo boom >&2; exit 3' harness");
    try {
        h.check("x");
        FAIL();
    } catch (const HarnessCrash& e) {
        EXPECT_NE(e.stderrTail().find("boom"), std::string::npos);
    }
}

TEST(ProcessHarness, GarbageResponseIsACrash) {
    ProcessHarness h("sh -c 'read line; echo not-json; sleep 5' harness");
    EXPECT_THROW(h.check("x"), HarnessCrash);
}

TEST(ProcessHarness, TimeoutKillsAndNextRequestRestarts) {
    ProcessHarness h("sh -c 'sleep 10' harness", {}, std::chrono::milliseconds(200));
    const auto started = std::chrono::steady_clock::now();
    EXPECT_THROW(h.check("x"), HarnessCrash);
    EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::seconds(5));
    EXPECT_THROW(h.check("x"), HarnessCrash);
}

TEST(ProcessHarness, RestartsAfterCrash) {
    // Answers one request, then exits.
    const auto script = std::filesystem::temp_directory_path() / "pilotgen-one-shot-harness.sh";
    std::ofstream(script) << "read line\n"
                             "id=$(printf '%s' \"$line\" | sed 's/.*\"id\":\\([0-9]*\\).*/\\1/')\n"
                             "printf '{\"id\":%s,\"ok\":true,\"payload\":{\"valid\":true}}\\n' \"$id\"\n";
    ProcessHarness h("sh " + script.string());
    EXPECT_TRUE(h.check("x").valid);
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    EXPECT_TRUE(h.check("y").valid);
    std::filesystem::remove(script);
}
