#pragma once

// The test generation loop. Prompts are processed first-in first-out: all
// base prompts, then the body, snippet and doc-comment refinement passes,
// then retry prompts in the order their parent tests failed. Completions
// for the next few prompts are fetched ahead of time; everything else is
// sequential, so a run is a pure function of the package, the completion
// backend and the configuration.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pilotgen/doc_miner.hpp"
#include "pilotgen/harness.hpp"
#include "pilotgen/llm_client.hpp"
#include "pilotgen/model.hpp"

namespace pilotgen::gen {

struct GeneratorConfig {
    std::string putName;
    std::string putPath;
    RefinerSet refiners = RefinerSet::all();
    int timeoutMs = 2000;
    std::size_t maxSnippets = docs::kDefaultMaxSnippets;
    bool exploreFunctionProps = true;
    std::size_t parallelLlm = 4;
};

struct PromptRecord {
    std::string id;  // "p<n>", in creation order
    Prompt prompt;
    std::string hash;
    std::optional<std::string> parentId;  // retry prompts only
    std::optional<std::size_t> retryOfTest;
    std::size_t completions = 0;
    std::size_t snippetsDropped = 0;
    std::optional<std::string> error;  // backend failure that skipped the prompt
};

struct TestRecord {
    std::size_t index = 0;  // 1-based, in discovery order
    CandidateTest candidate;
    TestOutcome outcome;
    std::size_t duplicateHits = 0;  // later completions that normalized to this test
    std::optional<harness::AnalysisFacts> analysis;
    std::optional<std::string> analysisError;
};

struct GenerationRun {
    GeneratorConfig config;
    std::vector<ApiFunction> apis;
    docs::MinedDocs mined;
    int skippedGetters = 0;
    std::vector<PromptRecord> prompts;
    std::vector<TestRecord> tests;
    CoverageData loadingCoverage;
};

struct Assembled {
    CandidateTest test;
    bool valid = false;
    bool truncated = false;
    bool repaired = false;
};

/// Joins the prompt head and a completion. Keeps the shortest completion
/// prefix, cut at a statement boundary, that the harness accepts as a whole
/// test without repair; otherwise takes the full completion and the harness
/// repair. An invalid result has an empty normalized source.
Assembled assemble_test(const Prompt& prompt, const std::string& completion, harness::Harness& harness);

/// Runs the normalized source. A harness crash becomes a Crash outcome.
TestOutcome execute_candidate(const CandidateTest& test, harness::Harness& harness, const GeneratorConfig& config);

/// Retry prompt for a failed test, when the parent is not a retry and the
/// refiner is enabled.
std::optional<Prompt> maybe_create_retry(const Prompt& prompt, const CandidateTest& test, const TestOutcome& outcome,
                                         const RefinerSet& refiners);

/// Upper bound on prompts processed for one function.
std::size_t worklist_bound(int completionsPerPrompt);

/// Explores the package, mines its documentation and runs the loop. Throws
/// ExplorationFailure when the package does not load.
GenerationRun generate_tests(harness::Harness& harness, llm::LlmClient& client, const GeneratorConfig& config);

/// Loop only, over an already explored and mined API.
void run_worklist(GenerationRun& run, harness::Harness& harness, llm::LlmClient& client);

}  // namespace pilotgen::gen
