#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pilotgen {

/// Half-open byte range.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

/// Edits the harness tokenizer reports for one test source.
struct NormalizationEdits {
    std::vector<Span> comments;
    std::vector<Span> describeArgs;  // first argument of each describe(...)
    std::vector<Span> itArgs;        // first argument of each it(...)

    friend bool operator==(const NormalizationEdits&, const NormalizationEdits&) = default;
};

inline constexpr std::string_view kSuiteDescription = "'test suite'";
inline constexpr std::string_view kCaseDescription = "'test case'";

/// Applies an edit list: comments are removed (a line left blank by the
/// removal is dropped along with its newline, and whitespace before an
/// end-of-line comment goes with it), describe/it descriptions become the
/// generic strings. Throws NormalizationError on overlapping or
/// out-of-range spans.
std::string apply_normalization(std::string_view source, const NormalizationEdits& edits);

/// Edit list computed with the built-in tokenizer. Throws NormalizationError
/// when the source cannot be tokenized.
NormalizationEdits find_normalization_edits(std::string_view source);

/// apply_normalization(source, find_normalization_edits(source)).
std::string normalize_test(std::string_view rawSource);

}  // namespace pilotgen
