#include "pilotgen/similarity.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pilotgen/errors.hpp"
#include "pilotgen/js_lexer.hpp"
#include "pilotgen/metrics.hpp"
#include "pilotgen/normalize.hpp"
#include "pilotgen/text.hpp"

namespace pilotgen::similarity {

namespace fs = std::filesystem;

namespace {

std::string normalized_or_raw(std::string_view source) {
    try {
        return normalize_test(source);
    } catch (const NormalizationError&) {
        return std::string(source);
    }
}

}  // namespace

std::string dedent(std::string_view text) {
    const auto lines = text::split_lines(text);
    std::size_t common = std::string_view::npos;
    for (auto line : lines) {
        if (text::trim(line).empty()) continue;
        common = std::min(common, line.find_first_not_of(" \t"));
    }
    if (common == std::string_view::npos) common = 0;
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        const auto line = lines[i];
        if (text::trim(line).empty()) continue;
        out.append(line.substr(common));
    }
    return out;
}

std::vector<std::string> extract_it_blocks(std::string_view source) {
    const auto lexed = js::tokenize(source);
    if (lexed.error) return {};
    std::vector<std::string> blocks;
    std::size_t coveredUntil = 0;
    for (const auto& call : js::find_calls(lexed.tokens, source, "it")) {
        const auto& callee = lexed.tokens[call.callee];
        if (callee.begin < coveredUntil) continue;
        std::size_t begin = callee.begin;
        const auto lineStart = source.rfind('\n', begin == 0 ? 0 : begin - 1);
        const std::size_t from = (lineStart == std::string_view::npos || begin == 0) ? 0 : lineStart + 1;
        if (text::trim(source.substr(from, begin - from)).empty()) begin = from;
        std::size_t end = lexed.tokens[call.close].end;
        if (call.close + 1 < lexed.tokens.size()) {
            const auto& next = lexed.tokens[call.close + 1];
            if (next.kind == js::TokenKind::Punctuator && next.text(source) == ";" && !next.newlineBefore) end = next.end;
        }
        coveredUntil = end;
        blocks.push_back(dedent(source.substr(begin, end - begin)));
    }
    return blocks;
}

std::vector<CorpusEntry> load_existing_tests(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw Error("existing tests directory not found: " + dir.string());
    for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
        const auto name = it->path().filename().string();
        if (it->is_directory() && (name == "node_modules" || (!name.empty() && name.front() == '.'))) {
            it.disable_recursion_pending();
            continue;
        }
        const auto ext = it->path().extension().string();
        if (it->is_regular_file() && (ext == ".js" || ext == ".mjs" || ext == ".cjs" || ext == ".ts")) {
            files.push_back(it->path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<CorpusEntry> corpus;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        const auto rel = fs::relative(file, dir).generic_string();
        const auto blocks = extract_it_blocks(normalized_or_raw(ss.str()));
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            corpus.push_back({rel + "#" + std::to_string(k + 1), blocks[k]});
        }
    }
    return corpus;
}

std::vector<Row> compare(const store::StoredRun& run, const std::vector<CorpusEntry>& corpus) {
    std::vector<Row> rows;
    if (corpus.empty()) return rows;
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& entry : corpus) texts.push_back(entry.text);

    for (const auto& test : run.tests) {
        if (test.status != TestStatus::Pass) continue;
        const std::string source = test.normalizedSource.empty() ? normalized_or_raw(test.rawSource) : test.normalizedSource;
        std::string generated;
        for (const auto& block : extract_it_blocks(source)) {
            if (!generated.empty()) generated += '\n';
            generated += block;
        }
        const auto best = metrics::max_similarity(generated, texts);
        rows.push_back({test.index, best->value, corpus[best->nearest].id});
    }
    return rows;
}

std::string to_csv(const std::vector<Row>& rows) {
    std::string out = "testId,maxSimilarity,nearestExistingTestId\n";
    for (const auto& row : rows) {
        char value[32];
        std::snprintf(value, sizeof value, "%.4f", row.maxSimilarity);
        std::string id = row.nearestId;
        if (id.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : id) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            id = quoted + "\"";
        }
        out += std::to_string(row.testIndex) + "," + value + "," + id + "\n";
    }
    return out;
}

}  // namespace pilotgen::similarity
