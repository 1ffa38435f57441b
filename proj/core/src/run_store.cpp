#include "pilotgen/run_store.hpp"

#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "pilotgen/errors.hpp"

namespace pilotgen::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr RefinerKind kAllRefiners[] = {RefinerKind::FnBody, RefinerKind::DocComment, RefinerKind::Snippet,
                                        RefinerKind::RetryWithError};

std::string iso_utc(std::chrono::system_clock::time_point t) {
    const std::time_t secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json snippet_to_json(const Snippet& s) {
    return json{{"text", s.text}, {"sourceFile", s.sourceFile}, {"blockIndex", s.blockIndex}, {"exampleIndex", s.exampleIndex}};
}

Snippet snippet_from_json(const json& j) {
    return Snippet{j.at("text").get<std::string>(), j.value("sourceFile", std::string{}), j.value("blockIndex", 0),
                   j.value("exampleIndex", 0)};
}

json prompt_index_entry(const gen::PromptRecord& r) {
    json j{{"id", r.id},
           {"hash", r.hash},
           {"target", render_access_path(r.prompt.target.accessPath)},
           {"includeBody", r.prompt.includeBody},
           {"includeDocComment", r.prompt.includeDocComment},
           {"includeSnippets", r.prompt.includeSnippets},
           {"snippetLimit", r.prompt.snippetLimit},
           {"retry", r.prompt.isRetry()},
           {"completions", r.completions}};
    if (r.parentId) j["parent"] = *r.parentId;
    if (r.retryOfTest) j["retryOfTest"] = *r.retryOfTest;
    if (r.snippetsDropped) j["snippetsDropped"] = r.snippetsDropped;
    if (r.error) j["error"] = *r.error;
    return j;
}

json outcome_entry(const gen::TestRecord& t) {
    json j{{"test", t.index},
           {"target", render_access_path(t.candidate.targetAccessPath)},
           {"targetPath", t.candidate.targetAccessPath},
           {"status", std::string(to_string(t.outcome.status))},
           {"category", std::string(to_string(t.outcome.category))},
           {"provenance", t.candidate.provenance},
           {"duplicateHits", t.duplicateHits},
           {"coverage", t.outcome.coverage.has_value()}};
    if (t.outcome.errorMessage) j["errorMessage"] = *t.outcome.errorMessage;
    return j;
}

std::optional<ErrorCategory> parse_category(std::string_view name) {
    for (auto c : {ErrorCategory::None, ErrorCategory::AssertionError, ErrorCategory::FileSystemError,
                   ErrorCategory::CorrectnessError, ErrorCategory::Timeout, ErrorCategory::Other}) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

CoverageData zeroed(CoverageData c) {
    for (auto& [file, fc] : c.perFile) {
        for (auto& [id, hits] : fc.statementHits) hits = 0;
        for (auto& [id, hits] : fc.branchHits) hits = 0;
    }
    return c;
}

std::set<std::string> relative_files(const fs::path& root) {
    std::set<std::string> out;
    if (!fs::is_directory(root)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) out.insert(fs::relative(entry.path(), root).generic_string());
    }
    return out;
}

}  // namespace

std::string_view refiner_display_name(RefinerKind kind) {
    switch (kind) {
        case RefinerKind::FnBody: return "FnBodyIncluder";
        case RefinerKind::DocComment: return "DocCommentIncluder";
        case RefinerKind::Snippet: return "SnippetIncluder";
        case RefinerKind::RetryWithError: return "RetryWithError";
    }
    return "?";
}

json settings_to_json(const RunSettings& s) {
    const auto& g = s.generator;
    const auto& m = s.model;
    json refiners = json::object();
    json disabled = json::array();
    for (auto kind : kAllRefiners) {
        refiners[std::string(refiner_display_name(kind))] = g.refiners.contains(kind);
        if (!g.refiners.contains(kind)) disabled.push_back(std::string(refiner_display_name(kind)));
    }
    json model{{"backend", std::string(llm::to_string(m.backend))},
               {"modelName", m.modelName},
               {"temperature", m.temperature},
               {"completionsPerPrompt", m.completionsPerPrompt},
               {"maxTokens", m.maxTokens},
               {"apiStyle", std::string(llm::to_string(m.apiStyle))},
               {"apiKeyEnvVar", m.apiKeyEnvVar},
               {"maxPromptChars", m.maxPromptChars}};
    if (m.endpointUrl) model["endpointUrl"] = *m.endpointUrl;
    json j{{"putName", g.putName},
           {"putPath", g.putPath},
           {"harnessCmd", s.harnessCmd},
           {"model", std::move(model)},
           {"refiners", std::move(refiners)},
           {"disabledRefiners", std::move(disabled)},
           {"timeoutMs", g.timeoutMs},
           {"maxSnippets", g.maxSnippets},
           {"exploreFunctionProps", g.exploreFunctionProps},
           {"parallelLlm", g.parallelLlm}};
    if (s.cacheFile) j["cacheFile"] = *s.cacheFile;
    if (s.mockScript) j["mockScript"] = *s.mockScript;
    return j;
}

RunSettings settings_from_json(const json& document) {
    const json& j = document.contains("settings") ? document.at("settings") : document;
    RunSettings s;
    auto& g = s.generator;
    g.putName = j.at("putName").get<std::string>();
    g.putPath = j.value("putPath", std::string{});
    g.timeoutMs = j.value("timeoutMs", 2000);
    g.maxSnippets = j.value("maxSnippets", docs::kDefaultMaxSnippets);
    g.exploreFunctionProps = j.value("exploreFunctionProps", true);
    g.parallelLlm = j.value("parallelLlm", std::size_t{4});
    g.refiners = RefinerSet::all();
    if (auto r = j.find("refiners"); r != j.end()) {
        for (auto kind : kAllRefiners) {
            if (!r->value(std::string(refiner_display_name(kind)), true)) g.refiners.disable(kind);
        }
    }
    s.harnessCmd = j.value("harnessCmd", std::string{});
    if (j.contains("cacheFile")) s.cacheFile = j.at("cacheFile").get<std::string>();
    if (j.contains("mockScript")) s.mockScript = j.at("mockScript").get<std::string>();
    if (auto mj = j.find("model"); mj != j.end()) {
        auto& m = s.model;
        if (auto kind = llm::parse_backend(mj->value("backend", std::string("replay")))) m.backend = *kind;
        m.modelName = mj->value("modelName", m.modelName);
        m.temperature = mj->value("temperature", m.temperature);
        m.completionsPerPrompt = mj->value("completionsPerPrompt", m.completionsPerPrompt);
        m.maxTokens = mj->value("maxTokens", m.maxTokens);
        if (auto style = llm::parse_api_style(mj->value("apiStyle", std::string("completions")))) m.apiStyle = *style;
        m.apiKeyEnvVar = mj->value("apiKeyEnvVar", m.apiKeyEnvVar);
        m.maxPromptChars = mj->value("maxPromptChars", m.maxPromptChars);
        if (mj->contains("endpointUrl")) m.endpointUrl = mj->at("endpointUrl").get<std::string>();
    }
    return s;
}

json api_to_json(const std::vector<ApiFunction>& apis) {
    json out = json::array();
    for (const auto& fn : apis) {
        json j{{"accessPath", render_access_path(fn.accessPath)}, {"path", fn.accessPath}, {"paramNames", fn.paramNames}};
        if (fn.sourceText) j["sourceText"] = *fn.sourceText;
        if (fn.sourceRange) j["sourceRange"] = *fn.sourceRange;
        if (fn.docComment) j["docComment"] = *fn.docComment;
        json snippets = json::array();
        for (const auto& s : fn.snippets) snippets.push_back(snippet_to_json(s));
        j["snippets"] = std::move(snippets);
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<ApiFunction> api_from_json(const json& j) {
    std::vector<ApiFunction> out;
    for (const auto& e : j) {
        ApiFunction fn;
        fn.accessPath = e.at("path").get<AccessPath>();
        fn.paramNames = e.value("paramNames", std::vector<std::string>{});
        if (e.contains("sourceText")) fn.sourceText = e.at("sourceText").get<std::string>();
        if (e.contains("sourceRange")) fn.sourceRange = e.at("sourceRange").get<SourceRange>();
        if (e.contains("docComment")) fn.docComment = e.at("docComment").get<std::string>();
        for (const auto& s : e.value("snippets", json::array())) fn.snippets.push_back(snippet_from_json(s));
        out.push_back(std::move(fn));
    }
    return out;
}

json mined_docs_to_json(const docs::MinedDocs& docs) {
    json snippets = json::object();
    for (const auto& [path, list] : docs.snippetsByPath) {
        json arr = json::array();
        for (const auto& s : list) arr.push_back(snippet_to_json(s));
        snippets[render_access_path(path)] = std::move(arr);
    }
    json comments = json::object();
    for (const auto& [path, text] : docs.docCommentByPath) comments[render_access_path(path)] = text;
    return json{{"snippets", std::move(snippets)}, {"docComments", std::move(comments)}};
}

json coverage_to_json(const CoverageData& coverage) {
    json out = json::object();
    for (const auto& [file, fc] : coverage.perFile) {
        json lines = json::object();
        for (const auto& [id, span] : fc.statementLines) lines[id] = {span.startLine, span.endLine};
        out[file] = json{{"s", fc.statementHits}, {"b", fc.branchHits}, {"lines", std::move(lines)}};
    }
    return out;
}

CoverageData coverage_from_json(const json& j) {
    CoverageData out;
    for (const auto& [file, entry] : j.items()) {
        auto& fc = out.perFile[file];
        fc.statementHits = entry.value("s", std::map<std::string, std::uint64_t>{});
        fc.branchHits = entry.value("b", std::map<std::string, std::uint64_t>{});
        const json linesOfEntry = entry.value("lines", json::object());
        for (const auto& [id, span] : linesOfEntry.items()) {
            fc.statementLines[id] = LineSpan{span.at(0).get<int>(), span.at(1).get<int>()};
        }
    }
    return out;
}

fs::path create_run_directory(const fs::path& outDir, std::chrono::system_clock::time_point now) {
    fs::create_directories(outDir);
    const std::time_t secs = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const std::string base = std::string("run-") + stamp;
    for (int k = 0;; ++k) {
        const fs::path candidate = outDir / (k == 0 ? base : base + "-" + std::to_string(k));
        if (fs::create_directory(candidate)) return candidate;
    }
}

void write_text(const fs::path& file, std::string_view text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("cannot write " + file.string());
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

json read_json(const fs::path& file) {
    try {
        return json::parse(read_text(file));
    } catch (const json::exception& e) {
        throw Error("malformed JSON in " + file.string() + ": " + e.what());
    }
}

void write_run(const fs::path& dir, const gen::GenerationRun& run, const RunSettings& settings, const Timing& timing) {
    write_json(dir / "api.json", api_to_json(run.apis));
    write_json(dir / "mined-docs.json", mined_docs_to_json(run.mined));

    std::string index;
    json truncations = json::array();
    json promptErrors = json::array();
    for (const auto& p : run.prompts) {
        write_text(dir / "prompts" / (p.id + ".txt"), p.prompt.renderedText);
        index += prompt_index_entry(p).dump() + "\n";
        if (p.snippetsDropped) truncations.push_back({{"prompt", p.id}, {"snippetsDropped", p.snippetsDropped}});
        if (p.error) promptErrors.push_back({{"prompt", p.id}, {"error", *p.error}});
    }
    write_text(dir / "prompts" / "index.jsonl", index);

    std::string outcomes;
    json durations = json::object();
    std::size_t passing = 0;
    for (const auto& t : run.tests) {
        const std::string n = std::to_string(t.index);
        write_text(dir / "tests" / (n + ".js"), t.candidate.rawSource);
        if (t.outcome.status != TestStatus::InvalidSyntax) {
            write_text(dir / "tests" / (n + ".normalized.js"), t.candidate.normalizedSource);
        }
        outcomes += outcome_entry(t).dump() + "\n";
        if (t.outcome.coverage) write_json(dir / "coverage" / (n + ".json"), coverage_to_json(*t.outcome.coverage));
        if (t.analysis) {
            write_json(dir / "analysis" / (n + ".json"), *t.analysis);
        } else if (t.analysisError) {
            write_json(dir / "analysis" / (n + ".json"), json{{"error", *t.analysisError}});
        }
        durations[n] = t.outcome.durationMs;
        if (t.outcome.status == TestStatus::Pass) ++passing;
    }
    write_text(dir / "outcomes.jsonl", outcomes);
    write_json(dir / "coverage" / "loading.json", coverage_to_json(run.loadingCoverage));

    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(timing.finishedAt - timing.startedAt);
    json meta{{"settings", settings_to_json(settings)},
              {"counts",
               {{"apis", run.apis.size()},
                {"prompts", run.prompts.size()},
                {"tests", run.tests.size()},
                {"passing", passing},
                {"promptErrors", promptErrors.size()}}},
              {"skippedGetters", run.skippedGetters},
              {"truncations", std::move(truncations)},
              {"promptErrors", std::move(promptErrors)},
              {"timing",
               {{"startedAt", iso_utc(timing.startedAt)},
                {"finishedAt", iso_utc(timing.finishedAt)},
                {"wallMs", wall.count()},
                {"testDurationsMs", std::move(durations)}}}};
    write_json(dir / "run-meta.json", meta);
}

StoredRun load_run(const fs::path& dir) {
    StoredRun run;
    const auto meta = read_json(dir / "run-meta.json");
    run.putName = meta.at("settings").at("putName").get<std::string>();
    run.apis = api_from_json(read_json(dir / "api.json"));
    if (fs::exists(dir / "coverage" / "loading.json")) {
        run.loadingCoverage = coverage_from_json(read_json(dir / "coverage" / "loading.json"));
    }

    std::istringstream lines(read_text(dir / "outcomes.jsonl"));
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        StoredTest t;
        t.index = j.at("test").get<std::size_t>();
        const std::string n = std::to_string(t.index);
        t.target = j.at("targetPath").get<AccessPath>();
        const auto status = parse_test_status(j.at("status").get<std::string>());
        if (!status) throw Error("unknown status in outcomes.jsonl for test " + n);
        t.status = *status;
        t.category = parse_category(j.value("category", std::string("None"))).value_or(ErrorCategory::Other);
        if (j.contains("errorMessage")) t.errorMessage = j.at("errorMessage").get<std::string>();
        t.duplicateHits = j.value("duplicateHits", std::size_t{0});
        t.rawSource = read_text(dir / "tests" / (n + ".js"));
        if (fs::exists(dir / "tests" / (n + ".normalized.js"))) {
            t.normalizedSource = read_text(dir / "tests" / (n + ".normalized.js"));
        }
        if (fs::exists(dir / "coverage" / (n + ".json"))) {
            t.coverage = coverage_from_json(read_json(dir / "coverage" / (n + ".json")));
        }
        if (fs::exists(dir / "analysis" / (n + ".json"))) {
            const auto facts = read_json(dir / "analysis" / (n + ".json"));
            if (facts.contains("error")) {
                t.analysisError = facts.at("error").get<std::string>();
            } else {
                t.analysis = facts.get<harness::AnalysisFacts>();
            }
        }
        run.tests.push_back(std::move(t));
    }
    return run;
}

metrics::SuiteReport build_report(const StoredRun& run, metrics::PerFunctionMode mode) {
    metrics::SuiteReport r;
    r.putName = run.putName;
    r.totalTests = run.tests.size();
    r.perFunctionMode = mode;

    const CoverageData baseline = zeroed(run.loadingCoverage);
    std::vector<CoverageData> passingCoverage{baseline};
    std::vector<CoverageData> nonTrivialCoverage{baseline};
    std::vector<CoverageData> uniqueInput;
    std::vector<std::pair<AccessPath, CoverageData>> byTarget;

    for (const auto& t : run.tests) {
        r.duplicates += t.duplicateHits;
        if (t.status == TestStatus::InvalidSyntax) ++r.invalid;
        if (t.status != TestStatus::Pass) {
            ++r.errorBreakdown[t.category];
            continue;
        }
        ++r.passing;
        const CoverageData coverage = t.coverage.value_or(CoverageData{});
        passingCoverage.push_back(coverage);
        uniqueInput.push_back(coverage);
        byTarget.emplace_back(t.target, coverage);
        if (!t.analysis) {
            if (t.analysisError) ++r.analysisFailures;
            continue;
        }
        if (metrics::is_non_trivial(*t.analysis)) {
            ++r.nonTrivial;
            nonTrivialCoverage.push_back(coverage);
        }
    }

    const auto merged = metrics::merge_coverage(passingCoverage);
    r.statements = metrics::statement_ratio(merged);
    r.branches = metrics::branch_ratio(merged);
    r.loadingStatements = metrics::statement_ratio(run.loadingCoverage);
    r.loadingBranches = metrics::branch_ratio(run.loadingCoverage);
    r.uniquelyContributing = metrics::uniquely_contributing(uniqueInput).size();
    r.nonTrivialStatements = metrics::statement_ratio(metrics::merge_coverage(nonTrivialCoverage));
    r.perFunction = mode == metrics::PerFunctionMode::OwnStatements
                        ? metrics::per_function_coverage(run.apis, merged)
                        : metrics::per_function_coverage_by_tests(run.apis, byTarget);
    return r;
}

metrics::SuiteReport write_report(const fs::path& runDir, metrics::PerFunctionMode mode) {
    const auto report = build_report(load_run(runDir), mode);
    write_json(runDir / "report.json", metrics::to_json(report));
    write_text(runDir / "report.md", metrics::to_markdown(report));
    return report;
}

std::vector<std::string> diff_run_directories(const fs::path& a, const fs::path& b) {
    const auto left = relative_files(a);
    const auto right = relative_files(b);
    std::set<std::string> all = left;
    all.insert(right.begin(), right.end());
    std::vector<std::string> differing;
    for (const auto& rel : all) {
        if (!left.count(rel) || !right.count(rel)) {
            differing.push_back(rel);
            continue;
        }
        if (rel == "run-meta.json") {
            auto x = read_json(a / rel);
            auto y = read_json(b / rel);
            x.erase("timing");
            y.erase("timing");
            if (x != y) differing.push_back(rel);
        } else if (read_text(a / rel) != read_text(b / rel)) {
            differing.push_back(rel);
        }
    }
    return differing;
}

}  // namespace pilotgen::store
