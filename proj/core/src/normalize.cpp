#include "pilotgen/normalize.hpp"

#include <algorithm>
#include <string>

#include "pilotgen/errors.hpp"
#include "pilotgen/js_lexer.hpp"

namespace pilotgen {

namespace {

struct Edit {
    Span span;
    std::string_view replacement;
    bool comment;
};

bool contains(const Span& outer, const Span& inner) { return outer.begin <= inner.begin && inner.end <= outer.end; }

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\v\f") == std::string_view::npos; }

// Drops lines left blank by a comment removal and trailing whitespace left
// in front of a removed end-of-line comment. Lines without a removal point
// are copied untouched.
std::string tidy_removed_lines(const std::string& text, const std::vector<std::size_t>& removalPoints) {
    std::string out;
    out.reserve(text.size());
    std::size_t next = 0;
    std::size_t lineStart = 0;
    while (lineStart <= text.size()) {
        const auto nl = text.find('\n', lineStart);
        const std::size_t lineEnd = nl == std::string::npos ? text.size() : nl;
        const std::string_view line(text.data() + lineStart, lineEnd - lineStart);

        bool touched = false;
        bool trailingRemoval = false;
        while (next < removalPoints.size() && removalPoints[next] <= lineEnd) {
            if (removalPoints[next] >= lineStart) {
                touched = true;
                const std::string_view after(text.data() + removalPoints[next], lineEnd - removalPoints[next]);
                if (blank(after)) trailingRemoval = true;
            }
            ++next;
        }

        if (touched && blank(line)) {
            // drop the line and its newline
        } else {
            if (touched && trailingRemoval) {
                const auto last = line.find_last_not_of(" \t\r\v\f");
                out.append(line.substr(0, last + 1));
                if (!line.empty() && line.back() == '\r') out += '\r';
            } else {
                out.append(line);
            }
            if (nl != std::string::npos) out += '\n';
        }
        if (nl == std::string::npos) break;
        lineStart = nl + 1;
    }
    return out;
}

}  // namespace

std::string apply_normalization(std::string_view source, const NormalizationEdits& edits) {
    std::vector<Edit> all;
    auto add = [&](const std::vector<Span>& spans, std::string_view replacement, bool comment) {
        for (const auto& span : spans) {
            if (span.begin > span.end || span.end > source.size()) {
                throw NormalizationError("edit span out of range");
            }
            all.push_back({span, replacement, comment});
        }
    };
    add(edits.describeArgs, kSuiteDescription, false);
    add(edits.itArgs, kCaseDescription, false);

    std::vector<Edit> rewrites = all;
    for (const auto& span : edits.comments) {
        if (span.begin > span.end || span.end > source.size()) throw NormalizationError("comment span out of range");
        const bool insideRewrite = std::any_of(rewrites.begin(), rewrites.end(),
                                               [&](const Edit& e) { return contains(e.span, span); });
        if (!insideRewrite) all.push_back({span, {}, true});
    }

    std::sort(all.begin(), all.end(), [](const Edit& a, const Edit& b) { return a.span < b.span; });
    for (std::size_t i = 1; i < all.size(); ++i) {
        if (all[i].span.begin < all[i - 1].span.end) throw NormalizationError("overlapping edit spans");
    }

    std::string out;
    out.reserve(source.size());
    std::vector<std::size_t> removalPoints;
    std::size_t cursor = 0;
    for (const auto& edit : all) {
        out.append(source.substr(cursor, edit.span.begin - cursor));
        if (edit.comment) {
            removalPoints.push_back(out.size());
        } else {
            out.append(edit.replacement);
        }
        cursor = edit.span.end;
    }
    out.append(source.substr(cursor));

    if (removalPoints.empty()) return out;
    return tidy_removed_lines(out, removalPoints);
}

NormalizationEdits find_normalization_edits(std::string_view source) {
    const auto lexed = js::tokenize(source);
    if (lexed.error) {
        throw NormalizationError("cannot tokenize test source at offset " + std::to_string(lexed.error->offset) +
                                 ": " + lexed.error->message);
    }
    const auto& tokens = lexed.tokens;

    NormalizationEdits edits;
    for (const auto& t : tokens) {
        if (t.isComment()) edits.comments.push_back({t.begin, t.end});
    }

    auto firstArgument = [&](const js::CallSite& call) -> std::optional<Span> {
        std::optional<std::size_t> first;
        std::optional<std::size_t> last;
        int depth = 0;
        for (std::size_t i = call.open + 1; i < call.close; ++i) {
            const auto& t = tokens[i];
            if (t.isComment()) continue;
            const auto text = t.text(source);
            if (t.kind == js::TokenKind::Punctuator) {
                if (depth == 0 && text == ",") break;
                if (text == "(" || text == "[" || text == "{") ++depth;
                if (text == ")" || text == "]" || text == "}") --depth;
            }
            if (!first) first = i;
            last = i;
        }
        if (!first) return std::nullopt;
        return Span{tokens[*first].begin, tokens[*last].end};
    };

    for (const auto& call : js::find_calls(tokens, source, "describe")) {
        if (auto span = firstArgument(call)) edits.describeArgs.push_back(*span);
    }
    for (const auto& call : js::find_calls(tokens, source, "it")) {
        if (auto span = firstArgument(call)) edits.itArgs.push_back(*span);
    }
    return edits;
}

std::string normalize_test(std::string_view rawSource) {
    return apply_normalization(rawSource, find_normalization_edits(rawSource));
}

}  // namespace pilotgen
