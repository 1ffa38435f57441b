#pragma once

// Run directory layout:
//
//   run-<stamp>/
//     api.json                 explored and mined API functions
//     mined-docs.json          {"snippets": {path: [...]}, "docComments": {path: text}}
//     prompts/<id>.txt         rendered prompt text
//     prompts/index.jsonl      one line per prompt: id, hash, flags, parent, completions, error
//     tests/<n>.js             raw test source (invalid candidates included)
//     tests/<n>.normalized.js  normalized source of valid tests
//     outcomes.jsonl           one line per test
//     coverage/<n>.json        per-test coverage; coverage/loading.json for the import-only run
//     analysis/<n>.json        def-use facts of passing tests, or {"error": ...}
//     run-meta.json            settings, counters, and a "timing" object
//
// Everything except run-meta.json's "timing" object is deterministic for a
// replayed run.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilotgen/doc_miner.hpp"
#include "pilotgen/generator.hpp"
#include "pilotgen/harness.hpp"
#include "pilotgen/llm_client.hpp"
#include "pilotgen/metrics.hpp"
#include "pilotgen/model.hpp"

namespace pilotgen::store {

struct RunSettings {
    gen::GeneratorConfig generator;
    llm::ModelConfig model;
    std::string harnessCmd;
    std::optional<std::string> cacheFile;
    std::optional<std::string> mockScript;
};

/// Names used in run metadata: FnBodyIncluder, DocCommentIncluder,
/// SnippetIncluder, RetryWithError.
std::string_view refiner_display_name(RefinerKind kind);

nlohmann::json settings_to_json(const RunSettings& settings);
/// Inverse of settings_to_json; also accepts a whole run-meta.json document.
RunSettings settings_from_json(const nlohmann::json& j);

nlohmann::json api_to_json(const std::vector<ApiFunction>& apis);
std::vector<ApiFunction> api_from_json(const nlohmann::json& j);
nlohmann::json mined_docs_to_json(const docs::MinedDocs& docs);
nlohmann::json coverage_to_json(const CoverageData& coverage);
CoverageData coverage_from_json(const nlohmann::json& j);

/// `<outDir>/run-<UTC stamp>`, with a `-<k>` suffix when taken. Created.
std::filesystem::path create_run_directory(const std::filesystem::path& outDir,
                                           std::chrono::system_clock::time_point now = std::chrono::system_clock::now());

struct Timing {
    std::chrono::system_clock::time_point startedAt;
    std::chrono::system_clock::time_point finishedAt;
};

void write_text(const std::filesystem::path& file, std::string_view text);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

void write_run(const std::filesystem::path& runDir, const gen::GenerationRun& run, const RunSettings& settings,
               const Timing& timing);

struct StoredTest {
    std::size_t index = 0;
    AccessPath target;
    TestStatus status = TestStatus::Pass;
    ErrorCategory category = ErrorCategory::None;
    std::optional<std::string> errorMessage;
    std::size_t duplicateHits = 0;
    std::string rawSource;
    std::string normalizedSource;
    std::optional<CoverageData> coverage;
    std::optional<harness::AnalysisFacts> analysis;
    std::optional<std::string> analysisError;
};

struct StoredRun {
    std::string putName;
    std::vector<ApiFunction> apis;
    std::vector<StoredTest> tests;
    CoverageData loadingCoverage;
};

StoredRun load_run(const std::filesystem::path& runDir);

metrics::SuiteReport build_report(const StoredRun& run,
                                  metrics::PerFunctionMode mode = metrics::PerFunctionMode::OwnStatements);

/// Writes report.json and report.md into the run directory.
metrics::SuiteReport write_report(const std::filesystem::path& runDir,
                                  metrics::PerFunctionMode mode = metrics::PerFunctionMode::OwnStatements);

/// Every file below `a` and `b` compared byte-for-byte, except that
/// run-meta.json is compared without its "timing" object. Returns the
/// relative paths that differ or exist on one side only.
std::vector<std::string> diff_run_directories(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace pilotgen::store
