#include "pilotgen/pipeline.hpp"

#include <fstream>

#include "pilotgen/doc_miner.hpp"
#include "pilotgen/errors.hpp"
#include "pilotgen/generator.hpp"

namespace pilotgen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> manifest_name(const fs::path& putPath) {
    std::ifstream in(putPath / "package.json");
    if (!in) return std::nullopt;
    try {
        const auto manifest = json::parse(in);
        if (manifest.contains("name") && manifest.at("name").is_string()) return manifest.at("name").get<std::string>();
    } catch (const json::exception&) {
    }
    return std::nullopt;
}

std::shared_ptr<llm::CompletionBackend> make_backend(const store::RunSettings& settings) {
    switch (settings.model.backend) {
        case llm::BackendKind::ScriptedMock:
            if (!settings.mockScript) throw BackendUnavailable("the mock backend needs a script file");
            if (!fs::is_regular_file(*settings.mockScript)) {
                throw BackendUnavailable("mock script not found: " + *settings.mockScript);
            }
            return std::make_shared<llm::ScriptedMockBackend>(llm::ScriptedMockBackend::from_file(*settings.mockScript));
        case llm::BackendKind::ReplayCache:
            if (!settings.cacheFile) throw BackendUnavailable("the replay backend needs a cache file");
            if (!fs::is_regular_file(*settings.cacheFile)) {
                throw BackendUnavailable("replay cache not found: " + *settings.cacheFile);
            }
            return std::make_shared<llm::ReplayBackend>(std::make_shared<llm::ReplayCache>(*settings.cacheFile));
        case llm::BackendKind::HttpEndpoint: {
            std::shared_ptr<llm::ReplayCache> cache;
            if (settings.cacheFile) cache = std::make_shared<llm::ReplayCache>(*settings.cacheFile);
            return std::make_shared<llm::HttpBackend>(llm::default_http_transport(), std::move(cache));
        }
    }
    throw BackendUnavailable("unknown backend");
}

namespace {

std::vector<ApiFunction> explore_functions(const store::RunSettings& settings, harness::Harness& h) {
    const auto& g = settings.generator;
    const auto result = h.explore(harness::ExploreRequest{g.putName, g.putPath, g.exploreFunctionProps});
    std::vector<ApiFunction> functions;
    for (const auto& entry : result.functions) {
        functions.push_back(entry.function);
        if (entry.docCommentCandidate && !functions.back().docComment) functions.back().docComment = entry.docCommentCandidate;
    }
    return functions;
}

}  // namespace

fs::path explore(const store::RunSettings& settings, harness::Harness& h, const fs::path& outDir) {
    const auto functions = explore_functions(settings, h);
    const auto file = outDir / "api.json";
    store::write_json(file, store::api_to_json(functions));
    return file;
}

fs::path mine(const store::RunSettings& settings, harness::Harness& h, const fs::path& outDir) {
    const auto functions = explore_functions(settings, h);
    const auto mined = docs::mine_docs(settings.generator.putPath, functions, settings.generator.maxSnippets);
    const auto file = outDir / "mined-docs.json";
    store::write_json(file, store::mined_docs_to_json(mined));
    return file;
}

GenerateResult generate(const store::RunSettings& settings, harness::Harness& h,
                        std::shared_ptr<llm::CompletionBackend> backend, const fs::path& outDir) {
    const auto started = std::chrono::system_clock::now();
    GenerateResult result;
    result.runDir = store::create_run_directory(outDir, started);

    llm::LlmClient client(settings.model, std::move(backend),
                          static_cast<std::ptrdiff_t>(settings.generator.parallelLlm));
    gen::GenerationRun run;
    try {
        run = gen::generate_tests(h, client, settings.generator);
    } catch (const ExplorationFailure& e) {
        store::write_json(result.runDir / "run-meta.json",
                          json{{"settings", store::settings_to_json(settings)},
                               {"error", {{"kind", "ExplorationFailure"}, {"message", e.what()}}}});
        throw;
    }
    store::write_run(result.runDir, run, settings, store::Timing{started, std::chrono::system_clock::now()});

    result.prompts = run.prompts.size();
    for (const auto& p : run.prompts) {
        if (p.error) ++result.promptErrors;
    }
    result.tests = run.tests.size();
    for (const auto& t : run.tests) {
        if (t.outcome.status == TestStatus::Pass) ++result.passing;
    }
    return result;
}

}  // namespace pilotgen::pipeline
