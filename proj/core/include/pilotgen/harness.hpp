#pragma once

// Client side of the harness protocol. The harness is a separate process
// running inside the target language runtime; it is spawned as
// `<harnessCmd> --stdio` and exchanges one JSON object per line:
//
//   -> {"id": 7, "cmd": "explore" | "check" | "analyze" | "run", "payload": {...}}
//   <- {"id": 7, "ok": true,  "payload": {...}}
//   <- {"id": 7, "ok": false, "error": {"kind": "LoadError", "message": "..."}}
//
// Payload shapes are defined by the to_json/from_json pairs in
// harness_protocol.cpp.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilotgen/model.hpp"
#include "pilotgen/normalize.hpp"

namespace pilotgen {

void to_json(nlohmann::json& j, const AccessPath& path);
void from_json(const nlohmann::json& j, AccessPath& path);
void to_json(nlohmann::json& j, const SourceRange& range);
void from_json(const nlohmann::json& j, SourceRange& range);

}  // namespace pilotgen

namespace pilotgen::harness {

struct ExploreRequest {
    std::string putName;
    std::string putPath;
    bool exploreFunctionProps = true;
};

struct ExploredFunction {
    ApiFunction function;
    std::optional<std::string> docCommentCandidate;
};

struct ExploreResult {
    std::vector<ExploredFunction> functions;
    int skippedGetters = 0;
};

struct CheckResult {
    bool valid = false;
    std::optional<std::string> repaired;
    NormalizationEdits edits;  // offsets into `repaired` when present, else into the input
    std::vector<std::size_t> statementBoundaries;  // offsets into the input
};

struct StatementFacts {
    std::string id;
    std::vector<std::string> defs;
    std::vector<std::string> uses;
    bool isAssertion = false;
    bool importsPut = false;
};

struct AnalysisFacts {
    std::vector<StatementFacts> statements;  // source order
    std::vector<std::pair<std::string, std::string>> orderEdges;  // (from, to): `to` depends on `from`
};

enum class RunStatus { Pass, AssertionFailure, Crash, Timeout };

struct RunRequest {
    std::string source;
    int timeoutMs = 2000;
    bool coverage = true;
    std::string putPath;
};

struct RunResult {
    RunStatus status = RunStatus::Pass;
    std::optional<std::string> errorMessage;
    std::int64_t durationMs = 0;
    std::optional<nlohmann::json> coverageReport;  // istanbul coverage-final.json shape
};

std::string_view to_string(RunStatus status);
TestStatus to_test_status(RunStatus status);

void to_json(nlohmann::json& j, const ExploreRequest& r);
void from_json(const nlohmann::json& j, ExploreRequest& r);
void to_json(nlohmann::json& j, const ExploredFunction& f);
void from_json(const nlohmann::json& j, ExploredFunction& f);
void to_json(nlohmann::json& j, const ExploreResult& r);
void from_json(const nlohmann::json& j, ExploreResult& r);
void to_json(nlohmann::json& j, const CheckResult& r);
void from_json(const nlohmann::json& j, CheckResult& r);
void to_json(nlohmann::json& j, const StatementFacts& s);
void from_json(const nlohmann::json& j, StatementFacts& s);
void to_json(nlohmann::json& j, const AnalysisFacts& a);
void from_json(const nlohmann::json& j, AnalysisFacts& a);
void to_json(nlohmann::json& j, const RunRequest& r);
void from_json(const nlohmann::json& j, RunRequest& r);
void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

class Harness {
public:
    virtual ~Harness() = default;

    /// Throws ExplorationFailure when the package does not load.
    virtual ExploreResult explore(const ExploreRequest& request) = 0;
    virtual CheckResult check(const std::string& source) = 0;
    /// Throws AnalysisFailure.
    virtual AnalysisFacts analyze(const std::string& source, const std::string& putName) = 0;
    /// Throws HarnessCrash on infrastructure failure.
    virtual RunResult run(const RunRequest& request) = 0;
};

/// Implements the typed calls on top of a raw request/response exchange.
class JsonHarness : public Harness {
public:
    ExploreResult explore(const ExploreRequest& request) override;
    CheckResult check(const std::string& source) override;
    AnalysisFacts analyze(const std::string& source, const std::string& putName) override;
    RunResult run(const RunRequest& request) override;

protected:
    /// Sends one request and returns the full response object.
    virtual nlohmann::json exchange(const nlohmann::json& request, std::chrono::milliseconds timeout) = 0;

private:
    nlohmann::json call(const std::string& cmd, nlohmann::json payload, std::chrono::milliseconds timeout);
    std::uint64_t nextId_ = 1;
};

inline constexpr std::chrono::milliseconds kResponseGrace{5000};

/// Spawns `<command> --stdio` through /bin/sh and talks to it over pipes.
/// A dead process is restarted on the next request.
class ProcessHarness : public JsonHarness {
public:
    explicit ProcessHarness(std::string command, std::filesystem::path workingDir = {},
                            std::chrono::milliseconds defaultTimeout = std::chrono::seconds(60));
    ~ProcessHarness() override;
    ProcessHarness(const ProcessHarness&) = delete;
    ProcessHarness& operator=(const ProcessHarness&) = delete;

protected:
    nlohmann::json exchange(const nlohmann::json& request, std::chrono::milliseconds timeout) override;

private:
    class Process;
    std::string command_;
    std::filesystem::path workingDir_;
    std::chrono::milliseconds defaultTimeout_;
    std::unique_ptr<Process> process_;
};

}  // namespace pilotgen::harness
