#include "pilotgen/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>

#include "pilotgen/errors.hpp"
#include "pilotgen/prompt_engine.hpp"
#include "pilotgen/text.hpp"

namespace pilotgen::metrics {

using nlohmann::json;

namespace {

bool contains_word(std::string_view haystack, std::string_view word) {
    for (auto pos = haystack.find(word); pos != std::string_view::npos; pos = haystack.find(word, pos + 1)) {
        const bool leftOk = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
        const auto after = pos + word.size();
        const bool rightOk = after >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[after]));
        if (leftOk && rightOk) return true;
    }
    return false;
}

bool looks_like_assertion(std::string_view message) {
    static const std::regex chai(R"(\bexpected\b.*\bto\s+(not\s+)?(equal|eql|be|deep|have|include|contain|match|throw)\b)");
    return contains_word(message, "AssertionError") || contains_word(message, "ERR_ASSERTION") ||
           std::regex_search(message.begin(), message.end(), chai);
}

bool looks_like_correctness(std::string_view message) {
    for (const char* name : {"TypeError", "SyntaxError", "ReferenceError"}) {
        if (contains_word(message, name)) return true;
    }
    return message.find("done() called multiple times") != std::string_view::npos ||
           message.find("Maximum call stack size exceeded") != std::string_view::npos;
}

std::string relative_key(const std::string& file, const std::filesystem::path& root) {
    if (root.empty()) return file;
    const std::filesystem::path p(file);
    const auto rel = p.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") return p.generic_string();
    return rel.generic_string();
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string fmt_percent(const Ratio& r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", r.percent());
    std::string out = buf;
    if (r.emptyDenominator()) out += " (empty)";
    return out;
}

std::string fmt_percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
    return buf;
}

double share(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

json ratio_json(const Ratio& r) {
    json j{{"covered", r.covered}, {"total", r.total}, {"percent", round2(r.percent())}};
    if (r.emptyDenominator()) j["flags"] = json::array({"empty-denominator"});
    return j;
}

}  // namespace

const std::vector<std::string>& file_system_error_codes() {
    static const std::vector<std::string> codes{"ENOENT", "EEXIST", "EACCES", "EISDIR", "ENOTDIR", "EPERM", "EMFILE"};
    return codes;
}

ErrorCategory classify_error(const TestOutcome& outcome) {
    if (outcome.status == TestStatus::Pass) return ErrorCategory::None;
    if (outcome.status == TestStatus::Timeout) return ErrorCategory::Timeout;
    const std::string_view message = outcome.errorMessage ? std::string_view(*outcome.errorMessage) : std::string_view{};
    for (const auto& code : file_system_error_codes()) {
        if (contains_word(message, code)) return ErrorCategory::FileSystemError;
    }
    if (outcome.status == TestStatus::AssertionFailure || looks_like_assertion(message)) {
        return ErrorCategory::AssertionError;
    }
    if (outcome.status == TestStatus::InvalidSyntax || looks_like_correctness(message)) {
        return ErrorCategory::CorrectnessError;
    }
    return ErrorCategory::Other;
}

CoverageData merge_coverage(const std::vector<CoverageData>& parts) {
    CoverageData merged;
    for (const auto& part : parts) {
        for (const auto& [file, fc] : part.perFile) {
            auto& target = merged.perFile[file];
            for (const auto& [id, hits] : fc.statementHits) target.statementHits[id] += hits;
            for (const auto& [id, hits] : fc.branchHits) target.branchHits[id] += hits;
            for (const auto& [id, span] : fc.statementLines) target.statementLines.emplace(id, span);
        }
    }
    return merged;
}

CoverageData coverage_from_istanbul(const json& report, const std::filesystem::path& root) {
    CoverageData out;
    if (!report.is_object()) return out;
    for (const auto& [file, entry] : report.items()) {
        auto& fc = out.perFile[relative_key(entry.value("path", file), root)];
        if (auto s = entry.find("s"); s != entry.end()) {
            for (const auto& [id, hits] : s->items()) fc.statementHits[id] = hits.get<std::uint64_t>();
        }
        if (auto map = entry.find("statementMap"); map != entry.end()) {
            for (const auto& [id, loc] : map->items()) {
                fc.statementLines[id] = LineSpan{loc.at("start").at("line").get<int>(), loc.at("end").at("line").get<int>()};
                fc.statementHits.try_emplace(id, 0);
            }
        }
        if (auto b = entry.find("b"); b != entry.end()) {
            for (const auto& [id, arms] : b->items()) {
                for (std::size_t arm = 0; arm < arms.size(); ++arm) {
                    fc.branchHits[id + "." + std::to_string(arm)] = arms[arm].get<std::uint64_t>();
                }
            }
        }
    }
    return out;
}

std::string loading_source(std::string_view putName) {
    return "let " + prompts::put_identifier(putName) + " = require('" + std::string(putName) + "');\n";
}

CoverageData loading_coverage(harness::Harness& h, const std::string& putName, const std::string& putPath,
                              int timeoutMs) {
    harness::RunRequest request{loading_source(putName), timeoutMs, true, putPath};
    const auto result = h.run(request);
    if (result.status != harness::RunStatus::Pass) {
        throw ExplorationFailure("loading " + putName + " failed: " + result.errorMessage.value_or("unknown error"));
    }
    return result.coverageReport ? coverage_from_istanbul(*result.coverageReport, putPath) : CoverageData{};
}

std::vector<std::size_t> uniquely_contributing(const std::vector<std::set<std::string>>& coveredSets) {
    std::map<std::string, std::size_t> owners;
    for (const auto& set : coveredSets) {
        for (const auto& id : set) ++owners[id];
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < coveredSets.size(); ++i) {
        const auto& set = coveredSets[i];
        if (std::any_of(set.begin(), set.end(), [&](const std::string& id) { return owners[id] == 1; })) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> uniquely_contributing(const std::vector<CoverageData>& passing) {
    std::vector<std::set<std::string>> sets;
    sets.reserve(passing.size());
    for (const auto& c : passing) sets.push_back(c.coveredStatements());
    return uniquely_contributing(sets);
}

std::set<std::string> backward_slice(const harness::AnalysisFacts& facts, const std::string& from) {
    const auto& stmts = facts.statements;
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < stmts.size(); ++i) position.emplace(stmts[i].id, i);

    std::map<std::string, std::vector<std::string>> orderDeps;
    for (const auto& [dep, dependent] : facts.orderEdges) orderDeps[dependent].push_back(dep);

    std::set<std::string> slice;
    std::vector<std::string> work{from};
    while (!work.empty()) {
        const std::string id = std::move(work.back());
        work.pop_back();
        if (!slice.insert(id).second) continue;
        if (auto it = orderDeps.find(id); it != orderDeps.end()) {
            for (const auto& dep : it->second) work.push_back(dep);
        }
        const auto pos = position.find(id);
        if (pos == position.end()) continue;
        for (const auto& name : stmts[pos->second].uses) {
            for (std::size_t j = pos->second; j-- > 0;) {
                const auto& defs = stmts[j].defs;
                if (std::find(defs.begin(), defs.end(), name) != defs.end()) {
                    work.push_back(stmts[j].id);
                    break;
                }
            }
        }
    }
    return slice;
}

bool is_non_trivial(const harness::AnalysisFacts& facts) {
    std::set<std::string> importing;
    for (const auto& s : facts.statements) {
        if (s.importsPut) importing.insert(s.id);
    }
    if (importing.empty()) return false;
    for (const auto& s : facts.statements) {
        if (!s.isAssertion) continue;
        const auto slice = backward_slice(facts, s.id);
        if (std::any_of(slice.begin(), slice.end(), [&](const std::string& id) { return importing.count(id) > 0; })) {
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> non_trivial_tests(const std::vector<std::optional<harness::AnalysisFacts>>& facts) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        if (facts[i] && is_non_trivial(*facts[i])) out.push_back(i);
    }
    return out;
}

std::optional<Similarity> max_similarity(std::string_view generated, const std::vector<std::string>& existing) {
    if (existing.empty()) return std::nullopt;
    Similarity best{-1.0, 0};
    for (std::size_t i = 0; i < existing.size(); ++i) {
        const auto longest = std::max(generated.size(), existing[i].size());
        const double value =
            longest == 0 ? 1.0
                         : 1.0 - static_cast<double>(text::levenshtein(generated, existing[i])) / static_cast<double>(longest);
        if (value > best.value) best = {value, i};
    }
    return best;
}

double Ratio::percent() const { return share(covered, total); }

Ratio statement_ratio(const CoverageData& coverage) {
    return {coverage.coveredStatements().size(), coverage.totalStatements()};
}

Ratio branch_ratio(const CoverageData& coverage) {
    return {coverage.coveredBranches().size(), coverage.totalBranches()};
}

std::optional<PerFunctionMode> parse_per_function_mode(std::string_view name) {
    if (name == "own-statements") return PerFunctionMode::OwnStatements;
    if (name == "targeting-tests") return PerFunctionMode::TargetingTests;
    return std::nullopt;
}

std::string_view to_string(PerFunctionMode mode) {
    return mode == PerFunctionMode::OwnStatements ? "own-statements" : "targeting-tests";
}

PerFunctionCoverage per_function_coverage(const std::vector<ApiFunction>& apis, const CoverageData& merged) {
    PerFunctionCoverage out;
    for (const auto& fn : apis) {
        if (!fn.sourceRange) {
            ++out.omitted;
            continue;
        }
        const auto& range = *fn.sourceRange;
        Ratio ratio;
        if (auto file = merged.perFile.find(range.file); file != merged.perFile.end()) {
            for (const auto& [id, span] : file->second.statementLines) {
                if (span.startLine < range.startLine || span.endLine > range.endLine) continue;
                ++ratio.total;
                auto hits = file->second.statementHits.find(id);
                if (hits != file->second.statementHits.end() && hits->second > 0) ++ratio.covered;
            }
        }
        out.byFunction[fn.accessPath] = ratio;
    }
    return out;
}

PerFunctionCoverage per_function_coverage_by_tests(
    const std::vector<ApiFunction>& apis, const std::vector<std::pair<AccessPath, CoverageData>>& passing) {
    PerFunctionCoverage out;
    for (const auto& fn : apis) {
        std::vector<CoverageData> parts;
        for (const auto& [target, coverage] : passing) {
            if (target == fn.accessPath) parts.push_back(coverage);
        }
        out.byFunction[fn.accessPath] = statement_ratio(merge_coverage(parts));
    }
    return out;
}

double SuiteReport::passingPercent() const { return share(passing, totalTests); }
double SuiteReport::uniquelyContributingPercent() const { return share(uniquelyContributing, passing); }
double SuiteReport::nonTrivialPercent() const { return share(nonTrivial, passing); }

json to_json(const SuiteReport& r) {
    json errors = json::object();
    for (const auto& [category, count] : r.errorBreakdown) errors[std::string(to_string(category))] = count;
    json perFunction = json::object();
    for (const auto& [path, ratio] : r.perFunction.byFunction) perFunction[render_access_path(path)] = ratio_json(ratio);
    return json{{"putName", r.putName},
                {"totalTests", r.totalTests},
                {"passing", {{"count", r.passing}, {"percent", round2(r.passingPercent())}}},
                {"duplicates", r.duplicates},
                {"invalid", r.invalid},
                {"stmtCov", ratio_json(r.statements)},
                {"branchCov", ratio_json(r.branches)},
                {"loadingStmtCov", ratio_json(r.loadingStatements)},
                {"loadingBranchCov", ratio_json(r.loadingBranches)},
                {"uniquelyContributing",
                 {{"count", r.uniquelyContributing}, {"percent", round2(r.uniquelyContributingPercent())}}},
                {"nonTrivial", {{"count", r.nonTrivial}, {"percent", round2(r.nonTrivialPercent())}}},
                {"analysisFailures", r.analysisFailures},
                {"nonTrivialStmtCov", ratio_json(r.nonTrivialStatements)},
                {"errorBreakdown", std::move(errors)},
                {"perFunctionMode", std::string(to_string(r.perFunctionMode))},
                {"perFunctionStmtCov", std::move(perFunction)},
                {"perFunctionOmitted", r.perFunction.omitted}};
}

std::string to_markdown(const SuiteReport& r) {
    std::string out = "# Test generation report: " + r.putName + "\n\n";
    out += "| Tests | Passing | Stmt Cov | Branch Cov | Loading Stmt Cov | Loading Branch Cov | Uniquely Contributing |\n";
    out += "|---|---|---|---|---|---|---|\n";
    out += "| " + std::to_string(r.totalTests) + " | " + std::to_string(r.passing) + " (" +
           fmt_percent(r.passingPercent()) + ") | " + fmt_percent(r.statements) + " | " + fmt_percent(r.branches) +
           " | " + fmt_percent(r.loadingStatements) + " | " + fmt_percent(r.loadingBranches) + " | " +
           std::to_string(r.uniquelyContributing) + " (" + fmt_percent(r.uniquelyContributingPercent()) + ") |\n\n";

    out += "| Non-trivial Tests | Non-trivial Stmt Cov | Analysis Failures |\n";
    out += "|---|---|---|\n";
    out += "| " + std::to_string(r.nonTrivial) + " (" + fmt_percent(r.nonTrivialPercent()) + ") | " +
           fmt_percent(r.nonTrivialStatements) + " | " + std::to_string(r.analysisFailures) + " |\n\n";

    out += "## Failed tests by error type\n\n| Category | Count |\n|---|---|\n";
    for (const auto& [category, count] : r.errorBreakdown) {
        out += "| " + std::string(to_string(category)) + " | " + std::to_string(count) + " |\n";
    }
    out += "\nDuplicates linked without re-execution: " + std::to_string(r.duplicates) +
           ". Invalid completions: " + std::to_string(r.invalid) + ".\n\n";

    out += "## Statement coverage per function (" + std::string(to_string(r.perFunctionMode)) + ")\n\n";
    out += "| Function | Covered | Total | Coverage |\n|---|---|---|---|\n";
    for (const auto& [path, ratio] : r.perFunction.byFunction) {
        out += "| " + render_access_path(path) + " | " + std::to_string(ratio.covered) + " | " +
               std::to_string(ratio.total) + " | " + fmt_percent(ratio) + " |\n";
    }
    if (r.perFunction.omitted) {
        out += "\n" + std::to_string(r.perFunction.omitted) + " function(s) without a source range omitted.\n";
    }
    return out;
}

}  // namespace pilotgen::metrics
