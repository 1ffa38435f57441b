#pragma once

// Memorization check: each passing generated test is compared with the
// package's own tests. Both sides are normalized (comments dropped, generic
// descriptions) and reduced to their outermost `it(...)` calls with common
// indentation removed.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilotgen/run_store.hpp"

namespace pilotgen::similarity {

/// Outermost `it(...)` calls (plus a directly following `;`), dedented.
/// Sources the tokenizer rejects yield nothing.
std::vector<std::string> extract_it_blocks(std::string_view source);

std::string dedent(std::string_view text);

struct CorpusEntry {
    std::string id;  // "<relative file>#<k>", k from 1
    std::string text;
};

/// .js/.mjs/.cjs/.ts files below `dir`, sorted by relative path.
std::vector<CorpusEntry> load_existing_tests(const std::filesystem::path& dir);

struct Row {
    std::size_t testIndex = 0;
    double maxSimilarity = 0.0;
    std::string nearestId;
};

/// One row per passing test. Empty corpus gives no rows.
std::vector<Row> compare(const store::StoredRun& run, const std::vector<CorpusEntry>& corpus);

/// testId,maxSimilarity,nearestExistingTestId
std::string to_csv(const std::vector<Row>& rows);

}  // namespace pilotgen::similarity
