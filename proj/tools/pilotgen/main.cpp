// pilotgen: explore | mine | generate | report | similarity
//
// Exit codes: 0 success, 1 usage error, 2 package failed to load,
// 3 completion backend failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilotgen/errors.hpp"
#include "pilotgen/harness.hpp"
#include "pilotgen/metrics.hpp"
#include "pilotgen/pipeline.hpp"
#include "pilotgen/run_store.hpp"
#include "pilotgen/similarity.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pilotgen;

enum ExitCode { kOk = 0, kUsage = 1, kLoadFailure = 2, kBackendFailure = 3 };

struct Options {
    std::string putPath = ".";
    std::string putName;
    std::string harnessCmd = "pilotgen-harness";
    std::string outDir = "pilotgen-out";
    std::string backend = "replay";
    std::string model = "gpt-3.5-turbo";
    std::string apiStyle = "completions";
    std::string endpoint;
    std::string apiKeyEnv = std::string(llm::kDefaultApiKeyEnvVar);
    double temperature = 0.0;
    int completions = 5;
    int maxTokens = 100;
    int timeoutMs = 2000;
    std::size_t maxSnippets = docs::kDefaultMaxSnippets;
    std::size_t parallelLlm = 4;
    std::size_t maxPromptChars = 16000;
    std::string seedCache;
    std::string mockScript;
    std::string replayMeta;
    std::vector<std::string> disabledRefiners;
    bool noFunctionProps = false;
    bool jsonErrors = false;
    std::string runDir;
    std::string existingTests;
    std::string perFunctionMode = "own-statements";
};

int fail(const Options& o, int code, const std::string& kind, const std::string& message) {
    if (o.jsonErrors) {
        std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}, {"exitCode", code}}}}.dump() << '\n';
    } else {
        std::cerr << "pilotgen: " << message << '\n';
    }
    return code;
}

store::RunSettings settings_from(const Options& o, const CLI::App& sub) {
    store::RunSettings s;
    if (!o.replayMeta.empty()) {
        s = store::settings_from_json(store::read_json(o.replayMeta));
        if (sub.count("--harness-cmd")) s.harnessCmd = o.harnessCmd;
        return s;
    }
    auto& g = s.generator;
    g.putPath = o.putPath;
    g.putName = o.putName;
    if (g.putName.empty()) {
        auto name = pipeline::manifest_name(o.putPath);
        if (!name) throw CLI::ValidationError("--put-name", "not given and no name in " + o.putPath + "/package.json");
        g.putName = *name;
    }
    g.timeoutMs = o.timeoutMs;
    g.maxSnippets = o.maxSnippets;
    g.parallelLlm = o.parallelLlm;
    g.exploreFunctionProps = !o.noFunctionProps;
    g.refiners = RefinerSet::all();
    for (const auto& name : o.disabledRefiners) {
        auto kind = parse_refiner(name);
        if (!kind) throw CLI::ValidationError("--disable-refiner", "unknown refiner '" + name + "'");
        g.refiners.disable(*kind);
    }

    auto& m = s.model;
    auto backend = llm::parse_backend(o.backend);
    if (!backend) throw CLI::ValidationError("--backend", "expected http, replay or mock");
    m.backend = *backend;
    auto style = llm::parse_api_style(o.apiStyle);
    if (!style) throw CLI::ValidationError("--api-style", "expected completions or chat");
    m.apiStyle = *style;
    m.modelName = o.model;
    m.temperature = o.temperature;
    m.completionsPerPrompt = o.completions;
    m.maxTokens = o.maxTokens;
    m.apiKeyEnvVar = o.apiKeyEnv;
    m.maxPromptChars = o.maxPromptChars;
    if (!o.endpoint.empty()) m.endpointUrl = o.endpoint;
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("model", e.what());
    }

    s.harnessCmd = o.harnessCmd;
    if (!o.mockScript.empty()) s.mockScript = o.mockScript;
    if (!o.seedCache.empty()) {
        s.cacheFile = o.seedCache;
    } else if (m.backend != llm::BackendKind::ScriptedMock) {
        s.cacheFile = (fs::path(o.outDir) / "cache" / "completions.jsonl").string();
    }
    return s;
}

void add_run_options(CLI::App& sub, Options& o) {
    sub.add_option("--put-path", o.putPath, "Package checkout directory")->capture_default_str();
    sub.add_option("--put-name", o.putName, "Package name (default: package.json name)");
    sub.add_option("--harness-cmd", o.harnessCmd, "Harness command; run as '<cmd> --stdio'")->capture_default_str();
    sub.add_option("--out", o.outDir, "Output directory")->capture_default_str();
    sub.add_option("--max-snippets", o.maxSnippets, "Snippets kept per function")->capture_default_str()->check(CLI::PositiveNumber);
    sub.add_flag("--no-explore-function-props", o.noFunctionProps, "Treat functions as leaves during exploration");
    sub.add_option("--timeout-ms", o.timeoutMs, "Per-test time limit")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_model_options(CLI::App& sub, Options& o) {
    sub.add_option("--backend", o.backend, "http, replay or mock")->capture_default_str();
    sub.add_option("--model", o.model, "Model name")->capture_default_str();
    sub.add_option("--api-style", o.apiStyle, "completions or chat")->capture_default_str();
    sub.add_option("--endpoint", o.endpoint, "Endpoint URL for the http backend");
    sub.add_option("--api-key-env", o.apiKeyEnv, "Environment variable holding the API key")->capture_default_str();
    sub.add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
    sub.add_option("--completions", o.completions, "Completions per prompt")->capture_default_str();
    sub.add_option("--max-tokens", o.maxTokens, "Tokens per completion")->capture_default_str();
    sub.add_option("--max-prompt-chars", o.maxPromptChars, "Prompt size budget, 0 for none")->capture_default_str();
    sub.add_option("--seed-cache", o.seedCache, "Completion cache file (default: <out>/cache/completions.jsonl)");
    sub.add_option("--mock-script", o.mockScript, "Script file for the mock backend");
    sub.add_option("--disable-refiner", o.disabledRefiners, "FnBody, DocComment, Snippet or RetryWithError; repeatable");
    sub.add_option("--parallel-llm", o.parallelLlm, "Concurrent completion requests")->capture_default_str()->check(CLI::PositiveNumber);
    sub.add_option("--replay-meta", o.replayMeta, "Reuse the settings of a previous run-meta.json");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Adaptive unit-test generation with a completion model"};
    app.set_config("--config", "", "TOML configuration file");
    app.add_flag("--json-errors", o.jsonErrors, "Report failures as JSON on stderr");
    app.require_subcommand(1);

    auto* exploreCmd = app.add_subcommand("explore", "Write the package API to api.json");
    add_run_options(*exploreCmd, o);
    auto* mineCmd = app.add_subcommand("mine", "Write mined usage snippets and doc comments to mined-docs.json");
    add_run_options(*mineCmd, o);
    auto* generateCmd = app.add_subcommand("generate", "Generate, run and record tests in a new run directory");
    add_run_options(*generateCmd, o);
    add_model_options(*generateCmd, o);
    auto* reportCmd = app.add_subcommand("report", "Write report.json and report.md for a run");
    reportCmd->add_option("run-dir", o.runDir, "Run directory")->required()->check(CLI::ExistingDirectory);
    reportCmd->add_option("--per-function-mode", o.perFunctionMode, "own-statements or targeting-tests")
        ->capture_default_str();
    auto* similarityCmd = app.add_subcommand("similarity", "Compare passing tests with the package's own tests");
    similarityCmd->add_option("run-dir", o.runDir, "Run directory")->required()->check(CLI::ExistingDirectory);
    similarityCmd->add_option("existing-tests", o.existingTests, "Directory of existing tests")
        ->required()
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*reportCmd) {
            auto mode = metrics::parse_per_function_mode(o.perFunctionMode);
            if (!mode) return fail(o, kUsage, "UsageError", "unknown --per-function-mode " + o.perFunctionMode);
            const auto report = store::write_report(o.runDir, *mode);
            std::cout << (fs::path(o.runDir) / "report.json").string() << '\n';
            (void)report;
            return kOk;
        }
        if (*similarityCmd) {
            const auto rows = similarity::compare(store::load_run(o.runDir), similarity::load_existing_tests(o.existingTests));
            const auto file = fs::path(o.runDir) / "similarity.csv";
            store::write_text(file, similarity::to_csv(rows));
            std::cout << file.string() << '\n';
            return kOk;
        }

        CLI::App& sub = *exploreCmd ? *exploreCmd : (*mineCmd ? *mineCmd : *generateCmd);
        const auto settings = settings_from(o, sub);
        const fs::path outDir = o.outDir;
        harness::ProcessHarness harness(settings.harnessCmd);

        if (*exploreCmd) {
            std::cout << pipeline::explore(settings, harness, outDir).string() << '\n';
            return kOk;
        }
        if (*mineCmd) {
            std::cout << pipeline::mine(settings, harness, outDir).string() << '\n';
            return kOk;
        }
        auto backend = pipeline::make_backend(settings);
        const auto result = pipeline::generate(settings, harness, std::move(backend), outDir);
        std::cout << result.runDir.string() << '\n';
        if (result.prompts > 0 && result.promptErrors == result.prompts) {
            return fail(o, kBackendFailure, "BackendUnavailable", "no prompt received completions");
        }
        return kOk;
    } catch (const CLI::ValidationError& e) {
        return fail(o, kUsage, "UsageError", e.what());
    } catch (const ExplorationFailure& e) {
        return fail(o, kLoadFailure, "ExplorationFailure", e.what());
    } catch (const BackendUnavailable& e) {
        return fail(o, kBackendFailure, "BackendUnavailable", e.what());
    } catch (const CacheMiss& e) {
        return fail(o, kBackendFailure, "CacheMiss", e.what());
    } catch (const HarnessCrash& e) {
        std::string message = e.what();
        if (!e.stderrTail().empty()) message += "\n" + e.stderrTail();
        return fail(o, kLoadFailure, "HarnessCrash", message);
    } catch (const std::exception& e) {
        return fail(o, kUsage, "Error", e.what());
    }
}
