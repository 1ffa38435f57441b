#pragma once

// Mines usage examples and doc comments for API functions.
//
// Snippets come from fenced code blocks in Markdown files. A block may hold
// several independent examples; a new one is assumed to begin whenever a
// top-level declaration re-declares a name already declared in the block.
// A function is associated with every snippet whose text contains its
// terminal name (case-sensitive substring). When a function has more than
// `maxSnippets` snippets, a diverse subset is chosen by single-linkage
// agglomerative clustering on Levenshtein distance, keeping the shortest
// member of each cluster.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pilotgen/model.hpp"

namespace pilotgen::docs {

inline constexpr std::size_t kDefaultMaxSnippets = 3;

struct MinedDocs {
    std::map<AccessPath, std::vector<Snippet>> snippetsByPath;
    std::map<AccessPath, std::string> docCommentByPath;
};

struct SourceFile {
    std::string path;  // relative to the checkout
    std::string text;
};

/// Fenced (```) blocks in document order. Info strings are dropped, blank
/// blocks are skipped, an unterminated fence runs to end of input.
std::vector<Snippet> extract_fenced_blocks(std::string_view markdown, std::string_view sourceFile = {});

std::vector<Snippet> split_on_redeclaration(const Snippet& snippet);

MinedDocs associate_snippets(const std::vector<ApiFunction>& functions, const std::vector<Snippet>& snippets);

/// Attaches the /** ... */ comment separated from a function's first line
/// only by whitespace. Functions without a source range are skipped.
MinedDocs associate_doc_comments(const std::vector<SourceFile>& sourceFiles,
                                 const std::vector<ApiFunction>& functions);

/// Input must be in document order. Returns min(|snippets|, maxSnippets)
/// snippets in document order.
std::vector<Snippet> select_snippets(const std::vector<Snippet>& snippets, std::size_t maxSnippets);

/// `.md` files under root, recursively, sorted by relative path;
/// node_modules and dot-directories are skipped.
std::vector<SourceFile> find_markdown_files(const std::filesystem::path& root);

/// Full pipeline over a checkout: scan, split, associate, select, plus doc
/// comments from the files named by each function's source range.
MinedDocs mine_docs(const std::filesystem::path& checkout, const std::vector<ApiFunction>& functions,
                    std::size_t maxSnippets = kDefaultMaxSnippets);

/// Copies mined snippets and doc comments onto the functions.
std::vector<ApiFunction> attach(std::vector<ApiFunction> functions, const MinedDocs& docs);

}  // namespace pilotgen::docs
