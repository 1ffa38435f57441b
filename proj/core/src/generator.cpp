#include "pilotgen/generator.hpp"

#include <deque>
#include <future>
#include <map>
#include <set>
#include <stdexcept>

#include "pilotgen/errors.hpp"
#include "pilotgen/metrics.hpp"
#include "pilotgen/normalize.hpp"
#include "pilotgen/prompt_engine.hpp"

namespace pilotgen::gen {

namespace {

struct Pending {
    std::size_t record;  // index into run.prompts
    std::optional<std::future<llm::CompletionBatch>> batch;
};

std::optional<std::string> normalized_from_check(const harness::CheckResult& check, const std::string& source) {
    try {
        return apply_normalization(check.repaired ? *check.repaired : source, check.edits);
    } catch (const NormalizationError&) {
        return std::nullopt;
    }
}

}  // namespace

Assembled assemble_test(const Prompt& prompt, const std::string& completion, harness::Harness& h) {
    const std::string prefix = prompts::candidate_prefix(prompt);
    const std::string full = prefix + completion;

    Assembled out;
    out.test.targetAccessPath = prompt.target.accessPath;
    const auto whole = h.check(full);

    for (const auto boundary : whole.statementBoundaries) {
        if (boundary <= prefix.size() || boundary >= full.size()) continue;
        const std::string candidate = full.substr(0, boundary);
        const auto probe = h.check(candidate);
        if (!probe.valid || probe.repaired) continue;
        if (auto normalized = normalized_from_check(probe, candidate)) {
            out.test.rawSource = candidate;
            out.test.normalizedSource = std::move(*normalized);
            out.valid = true;
            out.truncated = true;
            return out;
        }
    }

    out.test.rawSource = whole.repaired ? *whole.repaired : full;
    if (!whole.valid) return out;
    if (auto normalized = normalized_from_check(whole, full)) {
        out.test.normalizedSource = std::move(*normalized);
        out.valid = true;
        out.repaired = whole.repaired.has_value();
    }
    return out;
}

TestOutcome execute_candidate(const CandidateTest& test, harness::Harness& h, const GeneratorConfig& config) {
    TestOutcome outcome;
    try {
        const auto result = h.run(harness::RunRequest{test.normalizedSource, config.timeoutMs, true, config.putPath});
        outcome.status = harness::to_test_status(result.status);
        outcome.durationMs = result.durationMs;
        if (outcome.status != TestStatus::Pass) outcome.errorMessage = result.errorMessage.value_or("");
        if (result.coverageReport) outcome.coverage = metrics::coverage_from_istanbul(*result.coverageReport, config.putPath);
    } catch (const HarnessCrash& e) {
        outcome.status = TestStatus::Crash;
        outcome.errorMessage = e.stderrTail().empty() ? std::string(e.what()) : e.stderrTail();
    }
    outcome.category = metrics::classify_error(outcome);
    return outcome;
}

std::optional<Prompt> maybe_create_retry(const Prompt& prompt, const CandidateTest& test, const TestOutcome& outcome,
                                         const RefinerSet& refiners) {
    if (prompt.isRetry() || !refiners.contains(RefinerKind::RetryWithError)) return std::nullopt;
    const auto s = outcome.status;
    if (s != TestStatus::AssertionFailure && s != TestStatus::Crash && s != TestStatus::Timeout) return std::nullopt;
    auto block = prompts::extract_it_block(test.rawSource);
    if (!block) return std::nullopt;
    return prompts::make_retry_prompt(prompt, std::move(*block), outcome.errorMessage.value_or(""));
}

std::size_t worklist_bound(int completionsPerPrompt) {
    return 8 * (1 + static_cast<std::size_t>(std::max(completionsPerPrompt, 0)));
}

GenerationRun generate_tests(harness::Harness& h, llm::LlmClient& client, const GeneratorConfig& config) {
    GenerationRun run;
    run.config = config;

    const auto explored = h.explore(harness::ExploreRequest{config.putName, config.putPath, config.exploreFunctionProps});
    run.skippedGetters = explored.skippedGetters;
    std::vector<ApiFunction> functions;
    for (const auto& entry : explored.functions) functions.push_back(entry.function);

    run.mined = docs::mine_docs(config.putPath, functions, config.maxSnippets);
    for (const auto& entry : explored.functions) {
        if (entry.docCommentCandidate && !run.mined.docCommentByPath.count(entry.function.accessPath)) {
            run.mined.docCommentByPath[entry.function.accessPath] = *entry.docCommentCandidate;
        }
    }
    run.apis = docs::attach(std::move(functions), run.mined);
    run.loadingCoverage = metrics::loading_coverage(h, config.putName, config.putPath, config.timeoutMs);
    run_worklist(run, h, client);
    return run;
}

void run_worklist(GenerationRun& run, harness::Harness& h, llm::LlmClient& client) {
    const auto& model = client.config();
    std::deque<Pending> worklist;

    auto enqueue = [&](Prompt prompt, std::optional<std::string> parent, std::optional<std::size_t> retryOf) {
        PromptRecord record;
        record.id = "p" + std::to_string(run.prompts.size() + 1);
        record.snippetsDropped = prompts::truncate_to_budget(prompt, model.maxPromptChars);
        record.hash = llm::prompt_hash(prompt.renderedText, model);
        record.prompt = std::move(prompt);
        record.parentId = std::move(parent);
        record.retryOfTest = retryOf;
        run.prompts.push_back(std::move(record));
        worklist.push_back(Pending{run.prompts.size() - 1, std::nullopt});
    };

    for (auto& prompt : prompts::enumerate_prompts(run.apis, run.config.refiners)) {
        enqueue(std::move(prompt), std::nullopt, std::nullopt);
    }

    const std::size_t window = std::max<std::size_t>(run.config.parallelLlm, 1);
    auto prefetch = [&] {
        std::size_t launched = 0;
        for (auto& pending : worklist) {
            if (launched++ >= window) break;
            if (pending.batch) continue;
            const std::string text = run.prompts[pending.record].prompt.renderedText;
            pending.batch = std::async(std::launch::async, [&client, text] { return client.get_completions(text); });
        }
    };

    std::map<std::string, std::size_t> testByNormalized;
    std::map<std::string, std::size_t> invalidByRaw;
    std::map<AccessPath, std::size_t> processedPerFunction;
    const std::size_t bound = worklist_bound(model.completionsPerPrompt);

    while (!worklist.empty()) {
        prefetch();
        Pending pending = std::move(worklist.front());
        worklist.pop_front();
        const std::size_t recordIndex = pending.record;

        const AccessPath target = run.prompts[recordIndex].prompt.target.accessPath;
        if (++processedPerFunction[target] > bound) {
            throw std::logic_error("worklist bound exceeded for " + render_access_path(target));
        }

        llm::CompletionBatch batch;
        try {
            batch = pending.batch->get();
        } catch (const CacheMiss& e) {
            run.prompts[recordIndex].error = std::string("CacheMiss: ") + e.what();
            continue;
        } catch (const BackendUnavailable& e) {
            run.prompts[recordIndex].error = std::string("BackendUnavailable: ") + e.what();
            continue;
        }
        run.prompts[recordIndex].completions = batch.completions.size();

        for (const auto& completion : batch.completions) {
            const PromptRecord& record = run.prompts[recordIndex];
            auto assembled = assemble_test(record.prompt, completion, h);
            assembled.test.provenance.insert(record.id);

            if (!assembled.valid) {
                if (auto it = invalidByRaw.find(assembled.test.rawSource); it != invalidByRaw.end()) {
                    auto& existing = run.tests[it->second];
                    existing.candidate.provenance.insert(record.id);
                    ++existing.duplicateHits;
                    continue;
                }
                TestRecord test;
                test.index = run.tests.size() + 1;
                test.candidate = std::move(assembled.test);
                test.outcome.status = TestStatus::InvalidSyntax;
                test.outcome.errorMessage = "SyntaxError: completion does not form a valid test";
                test.outcome.category = metrics::classify_error(test.outcome);
                invalidByRaw.emplace(test.candidate.rawSource, run.tests.size());
                run.tests.push_back(std::move(test));
                continue;
            }

            if (auto it = testByNormalized.find(assembled.test.normalizedSource); it != testByNormalized.end()) {
                auto& existing = run.tests[it->second];
                existing.candidate.provenance.insert(record.id);
                ++existing.duplicateHits;
                continue;
            }

            TestRecord test;
            test.index = run.tests.size() + 1;
            test.candidate = std::move(assembled.test);
            test.outcome = execute_candidate(test.candidate, h, run.config);
            if (test.outcome.status == TestStatus::Pass) {
                try {
                    test.analysis = h.analyze(test.candidate.normalizedSource, run.config.putName);
                } catch (const AnalysisFailure& e) {
                    test.analysisError = e.what();
                }
            }
            testByNormalized.emplace(test.candidate.normalizedSource, run.tests.size());
            auto retry = maybe_create_retry(record.prompt, test.candidate, test.outcome, run.config.refiners);
            const std::string parentId = record.id;
            const std::size_t testIndex = test.index;
            run.tests.push_back(std::move(test));
            if (retry) enqueue(std::move(*retry), parentId, testIndex);
        }
    }
}

}  // namespace pilotgen::gen
