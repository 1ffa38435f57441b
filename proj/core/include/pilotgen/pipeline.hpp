#pragma once

// Command-level entry points shared by the CLI and the acceptance suite.

#include <filesystem>
#include <memory>
#include <string>

#include "pilotgen/harness.hpp"
#include "pilotgen/llm_client.hpp"
#include "pilotgen/run_store.hpp"

namespace pilotgen::pipeline {

/// Package name from `<putPath>/package.json`, or nullopt.
std::optional<std::string> manifest_name(const std::filesystem::path& putPath);

/// Builds the configured backend. Replay and HTTP use `settings.cacheFile`;
/// the mock reads `settings.mockScript`. Throws BackendUnavailable when a
/// required file is missing.
std::shared_ptr<llm::CompletionBackend> make_backend(const store::RunSettings& settings);

/// Explores and writes api.json under outDir. Returns the file written.
std::filesystem::path explore(const store::RunSettings& settings, harness::Harness& harness,
                              const std::filesystem::path& outDir);

/// Explores, mines and writes mined-docs.json under outDir.
std::filesystem::path mine(const store::RunSettings& settings, harness::Harness& harness,
                           const std::filesystem::path& outDir);

struct GenerateResult {
    std::filesystem::path runDir;
    std::size_t prompts = 0;
    std::size_t promptErrors = 0;
    std::size_t tests = 0;
    std::size_t passing = 0;
};

/// Full run into a new directory under outDir. On ExplorationFailure the
/// run directory keeps a run-meta.json with the error before rethrowing.
GenerateResult generate(const store::RunSettings& settings, harness::Harness& harness,
                        std::shared_ptr<llm::CompletionBackend> backend, const std::filesystem::path& outDir);

}  // namespace pilotgen::pipeline
