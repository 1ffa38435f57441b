#include "pilotgen/doc_miner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "pilotgen/text.hpp"

namespace pilotgen::docs {

namespace fs = std::filesystem;

namespace {

struct Fence {
    std::size_t indent;
    std::size_t ticks;
};

std::optional<Fence> parse_fence(std::string_view line) {
    std::size_t indent = 0;
    while (indent < line.size() && indent < 4 && line[indent] == ' ') ++indent;
    if (indent > 3) return std::nullopt;
    std::size_t ticks = 0;
    while (indent + ticks < line.size() && line[indent + ticks] == '`') ++ticks;
    if (ticks < 3) return std::nullopt;
    return Fence{indent, ticks};
}

bool closes_fence(std::string_view line, const Fence& open) {
    const auto fence = parse_fence(line);
    if (!fence || fence->ticks < open.ticks) return false;
    return text::trim(line.substr(fence->indent + fence->ticks)).empty();
}

std::string_view strip_indent(std::string_view line, std::size_t indent) {
    std::size_t n = 0;
    while (n < indent && n < line.size() && line[n] == ' ') ++n;
    return line.substr(n);
}

std::string join_lines(const std::vector<std::string_view>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out.append(lines[i]);
    }
    return std::string(text::trim_right(out));
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

// Tracks bracket depth and block-comment state across the lines of one
// snippet. Only depth-0 `const|let|var <name>` declarations are reported.
class DeclarationScanner {
public:
    std::vector<std::string> scan(std::string_view line) {
        std::vector<std::string> declared;
        std::size_t i = 0;
        while (i < line.size()) {
            if (inComment_) {
                const auto end = line.find("*/", i);
                if (end == std::string_view::npos) return declared;
                inComment_ = false;
                i = end + 2;
                continue;
            }
            const char c = line[i];
            if (line.substr(i, 2) == "//") return declared;
            if (line.substr(i, 2) == "/*") {
                inComment_ = true;
                i += 2;
                continue;
            }
            if (c == '\'' || c == '"' || c == '`') {
                std::size_t j = i + 1;
                while (j < line.size() && line[j] != c) j += line[j] == '\\' ? 2 : 1;
                i = j + 1;
                continue;
            }
            if (c == '{' || c == '(' || c == '[') {
                ++depth_;
            } else if (c == '}' || c == ')' || c == ']') {
                depth_ = std::max(0, depth_ - 1);
            } else if (ident_char(c)) {
                std::size_t j = i;
                while (j < line.size() && ident_char(line[j])) ++j;
                const auto word = line.substr(i, j - i);
                const bool member = i > 0 && line[i - 1] == '.';
                if (depth_ == 0 && !member && (word == "const" || word == "let" || word == "var")) {
                    std::size_t k = j;
                    while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
                    std::size_t e = k;
                    while (e < line.size() && ident_char(line[e])) ++e;
                    if (e > k && k > j && !std::isdigit(static_cast<unsigned char>(line[k]))) {
                        declared.emplace_back(line.substr(k, e - k));
                    }
                }
                i = j;
                continue;
            }
            ++i;
        }
        return declared;
    }

private:
    int depth_ = 0;
    bool inComment_ = false;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::vector<Snippet> extract_fenced_blocks(std::string_view markdown, std::string_view sourceFile) {
    std::vector<Snippet> out;
    std::optional<Fence> open;
    std::vector<std::string_view> body;
    int blockIndex = -1;

    auto flush = [&] {
        std::string content = join_lines(body);
        if (!text::trim(content).empty()) {
            out.push_back(Snippet{std::move(content), std::string(sourceFile), blockIndex, 0});
        }
        body.clear();
    };

    for (auto line : text::split_lines(markdown)) {
        if (!open) {
            if (auto fence = parse_fence(line)) {
                open = fence;
                ++blockIndex;
            }
            continue;
        }
        if (closes_fence(line, *open)) {
            flush();
            open.reset();
            continue;
        }
        body.push_back(strip_indent(line, open->indent));
    }
    if (open) flush();
    return out;
}

std::vector<Snippet> split_on_redeclaration(const Snippet& snippet) {
    std::vector<std::vector<std::string_view>> segments(1);
    std::set<std::string> declared;
    DeclarationScanner scanner;

    for (auto line : text::split_lines(snippet.text)) {
        const auto names = scanner.scan(line);
        const bool redeclares =
            std::any_of(names.begin(), names.end(), [&](const std::string& n) { return declared.count(n) > 0; });
        if (redeclares && !segments.back().empty()) {
            segments.emplace_back();
            declared.clear();
        }
        declared.insert(names.begin(), names.end());
        segments.back().push_back(line);
    }

    std::vector<Snippet> out;
    for (const auto& segment : segments) {
        std::string content = join_lines(segment);
        if (text::trim(content).empty()) continue;
        out.push_back(Snippet{std::move(content), snippet.sourceFile, snippet.blockIndex,
                              static_cast<int>(out.size())});
    }
    return out;
}

MinedDocs associate_snippets(const std::vector<ApiFunction>& functions, const std::vector<Snippet>& snippets) {
    MinedDocs docs;
    for (const auto& fn : functions) {
        const auto name = fn.accessPath.terminalName();
        if (!name || name->empty()) continue;
        std::vector<Snippet> matched;
        for (const auto& s : snippets) {
            if (s.text.find(*name) != std::string::npos) matched.push_back(s);
        }
        if (!matched.empty()) docs.snippetsByPath[fn.accessPath] = std::move(matched);
    }
    return docs;
}

MinedDocs associate_doc_comments(const std::vector<SourceFile>& sourceFiles,
                                 const std::vector<ApiFunction>& functions) {
    MinedDocs docs;
    for (const auto& fn : functions) {
        if (!fn.sourceRange || fn.sourceRange->startLine < 1) continue;
        const auto file = std::find_if(sourceFiles.begin(), sourceFiles.end(),
                                       [&](const SourceFile& f) { return f.path == fn.sourceRange->file; });
        if (file == sourceFiles.end()) continue;

        const std::string& source = file->text;
        std::size_t lineStart = 0;
        for (int line = 1; line < fn.sourceRange->startLine; ++line) {
            const auto nl = source.find('\n', lineStart);
            if (nl == std::string::npos) {
                lineStart = std::string::npos;
                break;
            }
            lineStart = nl + 1;
        }
        if (lineStart == std::string::npos) continue;

        const auto before = text::trim_right(std::string_view(source).substr(0, lineStart));
        if (before.size() < 5 || before.substr(before.size() - 2) != "*/") continue;
        const auto start = before.rfind("/**", before.size() - 2);
        if (start == std::string_view::npos) continue;
        const auto comment = before.substr(start);
        if (comment.size() < 5 || comment.substr(3, comment.size() - 5).find("*/") != std::string_view::npos) {
            continue;
        }
        docs.docCommentByPath[fn.accessPath] = std::string(comment);
    }
    return docs;
}

std::vector<Snippet> select_snippets(const std::vector<Snippet>& snippets, std::size_t maxSnippets) {
    const std::size_t budget = std::max<std::size_t>(maxSnippets, 1);
    if (snippets.size() <= budget) return snippets;

    using Key = std::tuple<int, int, std::size_t>;
    const std::size_t n = snippets.size();
    auto memberKey = [&](std::size_t i) { return Key{snippets[i].blockIndex, snippets[i].exampleIndex, i}; };

    // Single-linkage: partition distance is the minimum member distance,
    // maintained incrementally as partitions merge.
    std::vector<std::vector<std::size_t>> distance(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            distance[i][j] = distance[j][i] = text::levenshtein(snippets[i].text, snippets[j].text);
        }
    }
    std::vector<std::vector<std::size_t>> members(n);
    std::vector<Key> keys(n);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {i};
        keys[i] = memberKey(i);
    }

    for (std::size_t partitions = n; partitions > budget; --partitions) {
        std::size_t bestP = n, bestQ = n;
        std::size_t bestDistance = std::numeric_limits<std::size_t>::max();
        std::pair<Key, Key> bestPair;
        for (std::size_t p = 0; p < n; ++p) {
            if (!alive[p]) continue;
            for (std::size_t q = p + 1; q < n; ++q) {
                if (!alive[q]) continue;
                const auto pair = std::minmax(keys[p], keys[q]);
                const std::pair<Key, Key> ordered{pair.first, pair.second};
                if (distance[p][q] < bestDistance || (distance[p][q] == bestDistance && ordered < bestPair)) {
                    bestDistance = distance[p][q];
                    bestPair = ordered;
                    bestP = p;
                    bestQ = q;
                }
            }
        }
        members[bestP].insert(members[bestP].end(), members[bestQ].begin(), members[bestQ].end());
        members[bestQ].clear();
        keys[bestP] = std::min(keys[bestP], keys[bestQ]);
        alive[bestQ] = false;
        for (std::size_t r = 0; r < n; ++r) {
            if (!alive[r] || r == bestP) continue;
            distance[bestP][r] = distance[r][bestP] = std::min(distance[bestP][r], distance[bestQ][r]);
        }
    }

    std::vector<std::size_t> chosen;
    for (std::size_t p = 0; p < n; ++p) {
        if (!alive[p]) continue;
        chosen.push_back(*std::min_element(members[p].begin(), members[p].end(), [&](std::size_t a, std::size_t b) {
            return std::pair(snippets[a].text.size(), a) < std::pair(snippets[b].text.size(), b);
        }));
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<Snippet> out;
    out.reserve(chosen.size());
    for (auto i : chosen) out.push_back(snippets[i]);
    return out;
}

std::vector<SourceFile> find_markdown_files(const fs::path& root) {
    std::vector<SourceFile> files;
    if (!fs::is_directory(root)) return files;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
        const auto name = it->path().filename().string();
        if (it->is_directory()) {
            if (name == "node_modules" || (!name.empty() && name[0] == '.')) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file() || it->path().extension() != ".md") continue;
        files.push_back({fs::relative(it->path(), root).generic_string(), read_file(it->path())});
    }
    std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    return files;
}

MinedDocs mine_docs(const fs::path& checkout, const std::vector<ApiFunction>& functions, std::size_t maxSnippets) {
    std::vector<Snippet> snippets;
    for (const auto& file : find_markdown_files(checkout)) {
        for (const auto& block : extract_fenced_blocks(file.text, file.path)) {
            for (auto& example : split_on_redeclaration(block)) snippets.push_back(std::move(example));
        }
    }

    MinedDocs docs = associate_snippets(functions, snippets);
    for (auto& [path, list] : docs.snippetsByPath) list = select_snippets(list, maxSnippets);

    std::set<std::string> wanted;
    for (const auto& fn : functions) {
        if (fn.sourceRange) wanted.insert(fn.sourceRange->file);
    }
    std::vector<SourceFile> sources;
    for (const auto& rel : wanted) {
        const auto path = checkout / rel;
        if (fs::is_regular_file(path)) sources.push_back({rel, read_file(path)});
    }
    docs.docCommentByPath = associate_doc_comments(sources, functions).docCommentByPath;
    return docs;
}

std::vector<ApiFunction> attach(std::vector<ApiFunction> functions, const MinedDocs& docs) {
    for (auto& fn : functions) {
        if (auto it = docs.snippetsByPath.find(fn.accessPath); it != docs.snippetsByPath.end()) {
            fn.snippets = it->second;
        }
        if (auto it = docs.docCommentByPath.find(fn.accessPath); it != docs.docCommentByPath.end()) {
            fn.docComment = it->second;
        }
    }
    return functions;
}

}  // namespace pilotgen::docs
