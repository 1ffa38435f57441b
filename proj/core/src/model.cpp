#include "pilotgen/model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace pilotgen {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::optional<std::string> AccessPath::terminalName() const {
    if (components.empty()) return package;
    if (const auto* name = std::get_if<std::string>(&components.back())) return *name;
    return std::nullopt;
}

AccessPath AccessPath::extended(PathComponent next) const {
    AccessPath out = *this;
    out.components.push_back(std::move(next));
    return out;
}

std::string render_access_path(const AccessPath& path) {
    std::string out = path.package;
    for (const auto& component : path.components) {
        if (const auto* index = std::get_if<std::uint64_t>(&component)) {
            out += '[' + std::to_string(*index) + ']';
            continue;
        }
        const auto& name = std::get<std::string>(component);
        if (all_digits(name)) {
            out += '[' + name + ']';
        } else {
            out += '.' + name;
        }
    }
    return out;
}

std::string_view to_string(RefinerKind kind) {
    switch (kind) {
        case RefinerKind::FnBody: return "FnBody";
        case RefinerKind::DocComment: return "DocComment";
        case RefinerKind::Snippet: return "Snippet";
        case RefinerKind::RetryWithError: return "RetryWithError";
    }
    return "?";
}

std::optional<RefinerKind> parse_refiner(std::string_view name) {
    const std::string key = lower(name);
    if (key == "fnbody" || key == "fnbodyincluder" || key == "body") return RefinerKind::FnBody;
    if (key == "doccomment" || key == "doccommentincluder" || key == "doc") return RefinerKind::DocComment;
    if (key == "snippet" || key == "snippets" || key == "snippetincluder") return RefinerKind::Snippet;
    if (key == "retrywitherror" || key == "retry") return RefinerKind::RetryWithError;
    return std::nullopt;
}

RefinerSet RefinerSet::all() {
    RefinerSet set;
    for (auto kind : {RefinerKind::FnBody, RefinerKind::DocComment, RefinerKind::Snippet,
                      RefinerKind::RetryWithError}) {
        set.enable(kind);
    }
    return set;
}

RefinerSet& RefinerSet::enable(RefinerKind kind) {
    bits_ |= bit(kind);
    return *this;
}

RefinerSet& RefinerSet::disable(RefinerKind kind) {
    bits_ &= ~bit(kind);
    return *this;
}

void validate_prompt_flags(const Prompt& prompt) {
    if (prompt.includeBody && !prompt.target.sourceText) {
        throw std::invalid_argument("prompt includes a body but the target has no source text");
    }
    if (prompt.includeDocComment && !prompt.target.docComment) {
        throw std::invalid_argument("prompt includes a doc comment but the target has none");
    }
    if (prompt.includeSnippets && prompt.target.snippets.empty()) {
        throw std::invalid_argument("prompt includes snippets but the target has none");
    }
}

std::string_view to_string(TestStatus status) {
    switch (status) {
        case TestStatus::Pass: return "pass";
        case TestStatus::AssertionFailure: return "assertionFailure";
        case TestStatus::Crash: return "crash";
        case TestStatus::Timeout: return "timeout";
        case TestStatus::InvalidSyntax: return "invalidSyntax";
    }
    return "?";
}

std::optional<TestStatus> parse_test_status(std::string_view text) {
    for (auto status : {TestStatus::Pass, TestStatus::AssertionFailure, TestStatus::Crash, TestStatus::Timeout,
                        TestStatus::InvalidSyntax}) {
        if (to_string(status) == text) return status;
    }
    return std::nullopt;
}

std::string_view to_string(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::None: return "None";
        case ErrorCategory::AssertionError: return "AssertionError";
        case ErrorCategory::FileSystemError: return "FileSystemError";
        case ErrorCategory::CorrectnessError: return "CorrectnessError";
        case ErrorCategory::Timeout: return "Timeout";
        case ErrorCategory::Other: return "Other";
    }
    return "?";
}

std::set<std::string> CoverageData::coveredStatements() const {
    std::set<std::string> out;
    for (const auto& [file, cov] : perFile) {
        for (const auto& [id, hits] : cov.statementHits) {
            if (hits > 0) out.insert(file + '#' + id);
        }
    }
    return out;
}

std::set<std::string> CoverageData::coveredBranches() const {
    std::set<std::string> out;
    for (const auto& [file, cov] : perFile) {
        for (const auto& [id, hits] : cov.branchHits) {
            if (hits > 0) out.insert(file + '#' + id);
        }
    }
    return out;
}

std::size_t CoverageData::totalStatements() const {
    std::size_t n = 0;
    for (const auto& [file, cov] : perFile) n += cov.statementHits.size();
    return n;
}

std::size_t CoverageData::totalBranches() const {
    std::size_t n = 0;
    for (const auto& [file, cov] : perFile) n += cov.branchHits.size();
    return n;
}

}  // namespace pilotgen
