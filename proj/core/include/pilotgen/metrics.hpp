#pragma once

// Failure taxonomy, coverage aggregation and suite-level metrics.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilotgen/harness.hpp"
#include "pilotgen/model.hpp"

namespace pilotgen::metrics {

/// Precedence: Timeout, FileSystemError, AssertionError, CorrectnessError,
/// Other. Pass maps to None.
ErrorCategory classify_error(const TestOutcome& outcome);

/// Error codes treated as file-system failures.
const std::vector<std::string>& file_system_error_codes();

/// Hit counts are summed per id; statement line spans are unioned.
CoverageData merge_coverage(const std::vector<CoverageData>& parts);

/// Converts an istanbul `coverage-final.json` document. File keys are made
/// relative to `root` when they lie beneath it. Branch arms become
/// "<branchId>.<arm>".
CoverageData coverage_from_istanbul(const nlohmann::json& report, const std::filesystem::path& root = {});

/// Source of a test that only imports the package.
std::string loading_source(std::string_view putName);

/// Coverage of a run that only imports the package. Throws
/// ExplorationFailure when that run does not pass.
CoverageData loading_coverage(harness::Harness& harness, const std::string& putName, const std::string& putPath,
                              int timeoutMs = 2000);

/// Indices of entries covering at least one id no other entry covers.
std::vector<std::size_t> uniquely_contributing(const std::vector<std::set<std::string>>& coveredSets);
std::vector<std::size_t> uniquely_contributing(const std::vector<CoverageData>& passing);

/// Statement ids (fact ids) in the backward slice of `from`: nearest
/// preceding definition of every used name, plus order edges.
std::set<std::string> backward_slice(const harness::AnalysisFacts& facts, const std::string& from);

/// True iff some assertion's backward slice reaches a statement that imports
/// or calls through the package.
bool is_non_trivial(const harness::AnalysisFacts& facts);

/// Indices of non-trivial tests. A missing fact set (analysis failed) counts
/// as trivial.
std::vector<std::size_t> non_trivial_tests(const std::vector<std::optional<harness::AnalysisFacts>>& facts);

struct Similarity {
    double value = 0.0;
    std::size_t nearest = 0;  // index into the corpus
};

/// max over the corpus of 1 - lev(t, c) / max(|t|, |c|). Absent for an
/// empty corpus. Two empty strings have similarity 1.
std::optional<Similarity> max_similarity(std::string_view generated, const std::vector<std::string>& existing);

struct Ratio {
    std::size_t covered = 0;
    std::size_t total = 0;

    /// 0 when the denominator is empty.
    double percent() const;
    bool emptyDenominator() const { return total == 0; }
};

Ratio statement_ratio(const CoverageData& coverage);
Ratio branch_ratio(const CoverageData& coverage);

enum class PerFunctionMode {
    OwnStatements,  // statements inside the function's range, whole passing suite
    TargetingTests,  // package coverage of the passing tests generated for the function
};

std::optional<PerFunctionMode> parse_per_function_mode(std::string_view name);
std::string_view to_string(PerFunctionMode mode);

struct PerFunctionCoverage {
    std::map<AccessPath, Ratio> byFunction;
    std::size_t omitted = 0;  // functions without a source range
};

/// OwnStatements reading: statements whose line span lies inside the
/// function's source range, under `merged`.
PerFunctionCoverage per_function_coverage(const std::vector<ApiFunction>& apis, const CoverageData& merged);

/// TargetingTests reading: for each function, the merged coverage of the
/// passing tests whose target is that function.
PerFunctionCoverage per_function_coverage_by_tests(
    const std::vector<ApiFunction>& apis, const std::vector<std::pair<AccessPath, CoverageData>>& passing);

struct SuiteReport {
    std::string putName;
    std::size_t totalTests = 0;
    std::size_t passing = 0;
    std::size_t duplicates = 0;  // completions that normalized to an already seen test
    std::size_t invalid = 0;
    Ratio statements;
    Ratio branches;
    Ratio loadingStatements;
    Ratio loadingBranches;
    std::size_t uniquelyContributing = 0;
    std::size_t nonTrivial = 0;
    std::size_t analysisFailures = 0;
    Ratio nonTrivialStatements;
    std::map<ErrorCategory, std::size_t> errorBreakdown;
    PerFunctionMode perFunctionMode = PerFunctionMode::OwnStatements;
    PerFunctionCoverage perFunction;

    double passingPercent() const;
    double uniquelyContributingPercent() const;
    double nonTrivialPercent() const;
};

nlohmann::json to_json(const SuiteReport& report);
std::string to_markdown(const SuiteReport& report);

}  // namespace pilotgen::metrics
