#pragma once

// Shared domain types. Everything here is a plain value type; once built it
// is never mutated by the pipeline, so instances can be shared freely across
// worker threads.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pilotgen {

/// One step in an access path: a property name or an array index.
using PathComponent = std::variant<std::string, std::uint64_t>;

struct AccessPath {
    std::string package;
    std::vector<PathComponent> components;

    /// Last property name, or the package name for the root. Numeric
    /// terminals have no name.
    std::optional<std::string> terminalName() const;

    AccessPath extended(PathComponent next) const;

    friend bool operator==(const AccessPath&, const AccessPath&) = default;
    friend auto operator<=>(const AccessPath&, const AccessPath&) = default;
};

/// `pkg.a[3].b`. Property names made only of digits use bracket syntax too.
std::string render_access_path(const AccessPath& path);

struct SourceRange {
    std::string file;  // relative to the package checkout
    int startLine = 0;  // 1-based, inclusive
    int endLine = 0;

    friend bool operator==(const SourceRange&, const SourceRange&) = default;
};

struct Snippet {
    std::string text;
    std::string sourceFile;
    int blockIndex = 0;
    int exampleIndex = 0;

    friend bool operator==(const Snippet&, const Snippet&) = default;
};

struct ApiFunction {
    AccessPath accessPath;
    std::vector<std::string> paramNames;  // verbatim, duplicates preserved
    std::optional<std::string> sourceText;
    std::optional<std::string> docComment;
    std::vector<Snippet> snippets;
    std::optional<SourceRange> sourceRange;

    friend bool operator==(const ApiFunction&, const ApiFunction&) = default;
};

enum class RefinerKind { FnBody, DocComment, Snippet, RetryWithError };

std::string_view to_string(RefinerKind kind);
/// Accepts `FnBody`, `FnBodyIncluder`, and case-insensitive variants.
std::optional<RefinerKind> parse_refiner(std::string_view name);

class RefinerSet {
public:
    RefinerSet() = default;
    static RefinerSet all();

    bool contains(RefinerKind kind) const { return (bits_ & bit(kind)) != 0; }
    RefinerSet& enable(RefinerKind kind);
    RefinerSet& disable(RefinerKind kind);

    friend bool operator==(const RefinerSet&, const RefinerSet&) = default;

private:
    static unsigned bit(RefinerKind kind) { return 1u << static_cast<unsigned>(kind); }
    unsigned bits_ = 0;
};

struct RetryContext {
    std::string failingTest;  // the complete failing it(...) block
    std::string errorMessage;

    friend bool operator==(const RetryContext&, const RetryContext&) = default;
};

struct Prompt {
    ApiFunction target;
    bool includeBody = false;
    bool includeDocComment = false;
    bool includeSnippets = false;
    /// Number of leading target.snippets rendered; lowered when a prompt is
    /// truncated to fit the context budget.
    std::size_t snippetLimit = 0;
    std::optional<RetryContext> retryContext;
    std::string renderedText;

    bool isRetry() const { return retryContext.has_value(); }
    friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// Throws std::invalid_argument when a flag refers to metadata the target lacks.
void validate_prompt_flags(const Prompt& prompt);

struct CandidateTest {
    std::string normalizedSource;
    std::string rawSource;
    std::set<std::string> provenance;  // prompt ids
    AccessPath targetAccessPath;

    friend bool operator==(const CandidateTest& a, const CandidateTest& b) {
        return a.normalizedSource == b.normalizedSource;
    }
};

enum class TestStatus { Pass, AssertionFailure, Crash, Timeout, InvalidSyntax };

std::string_view to_string(TestStatus status);
std::optional<TestStatus> parse_test_status(std::string_view text);

enum class ErrorCategory { None, AssertionError, FileSystemError, CorrectnessError, Timeout, Other };

std::string_view to_string(ErrorCategory category);

struct LineSpan {
    int startLine = 0;
    int endLine = 0;
    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct FileCoverage {
    std::map<std::string, std::uint64_t> statementHits;
    std::map<std::string, std::uint64_t> branchHits;
    std::map<std::string, LineSpan> statementLines;

    friend bool operator==(const FileCoverage&, const FileCoverage&) = default;
};

/// Statement and branch ids are opaque strings from the coverage report.
struct CoverageData {
    std::map<std::string, FileCoverage> perFile;

    /// "file#id" keys of statements with a nonzero count.
    std::set<std::string> coveredStatements() const;
    std::set<std::string> coveredBranches() const;
    std::size_t totalStatements() const;
    std::size_t totalBranches() const;

    friend bool operator==(const CoverageData&, const CoverageData&) = default;
};

struct TestOutcome {
    TestStatus status = TestStatus::Pass;
    std::optional<std::string> errorMessage;
    ErrorCategory category = ErrorCategory::None;
    std::optional<CoverageData> coverage;
    std::int64_t durationMs = 0;
};

}  // namespace pilotgen
