#include "pilotgen/prompt_engine.hpp"

#include <cctype>
#include <stdexcept>

#include "pilotgen/js_lexer.hpp"
#include "pilotgen/text.hpp"

namespace pilotgen::prompts {

namespace {

constexpr std::string_view kIndent = "    ";

std::string quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\\' || c == '\'') out += '\\';
        out += c;
    }
    out += '\'';
    return out;
}

void append_commented(std::string& out, std::string_view text, std::string_view prefix) {
    for (auto line : text::split_lines(text)) {
        out.append(prefix);
        out.append(line);
        out += '\n';
    }
}

std::string header(std::string_view putName) {
    std::string out;
    out += "let mocha = require('mocha');\n";
    out += "let assert = require('assert');\n";
    out += "let " + put_identifier(putName) + " = require(" + quote(putName) + ");\n";
    return out;
}

}  // namespace

std::string put_identifier(std::string_view putName) {
    std::string id;
    id.reserve(putName.size() + 1);
    for (char c : putName) {
        id += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    }
    if (id.empty() || std::isdigit(static_cast<unsigned char>(id.front()))) id.insert(id.begin(), '_');
    return id;
}

std::string render_signature(const ApiFunction& target) {
    std::string out = "// " + render_access_path(target.accessPath) + "(";
    for (std::size_t i = 0; i < target.paramNames.size(); ++i) {
        if (i) out += ", ";
        out += target.paramNames[i];
    }
    out += ")\n";
    return out;
}

std::string render_metadata_block(const Prompt& prompt) {
    validate_prompt_flags(prompt);
    const ApiFunction& target = prompt.target;
    std::string out;
    if (prompt.includeSnippets) {
        const std::size_t count = std::min(prompt.snippetLimit, target.snippets.size());
        for (std::size_t k = 0; k < count; ++k) {
            out += "// usage #" + std::to_string(k + 1) + "\n";
            append_commented(out, target.snippets[k].text, "// ");
        }
    }
    if (prompt.includeDocComment) append_commented(out, *target.docComment, "// ");
    if (prompt.includeBody) append_commented(out, *target.sourceText, "// ");
    out += render_signature(target);
    return out;
}

std::string render_preamble(const Prompt& prompt) {
    const auto& putName = prompt.target.accessPath.package;
    return header(putName) + render_metadata_block(prompt) + "describe(" + quote("test " + put_identifier(putName)) +
           ", function() {\n";
}

std::string render_it_opener(std::string_view description) {
    return std::string(kIndent) + "it(" + quote(description) + ", function(done) {\n";
}

std::string render_prompt(const Prompt& prompt) {
    if (prompt.retryContext) {
        Prompt base = prompt;
        base.retryContext.reset();
        return render_retry_prompt(base, prompt.retryContext->failingTest, prompt.retryContext->errorMessage);
    }
    return render_preamble(prompt) + render_it_opener("test " + render_access_path(prompt.target.accessPath));
}

std::string candidate_prefix(const Prompt& prompt) {
    if (!prompt.retryContext) return prompt.renderedText.empty() ? render_prompt(prompt) : prompt.renderedText;
    return render_preamble(prompt) + render_it_opener("test " + put_identifier(prompt.target.accessPath.package));
}

std::string render_base_prompt(const ApiFunction& target, std::string_view putName) {
    ApiFunction adjusted = target;
    adjusted.accessPath.package = std::string(putName);
    return render_prompt(make_base_prompt(adjusted));
}

std::string render_retry_prompt(const Prompt& base, std::string_view failingTest, std::string_view errorMessage) {
    if (base.retryContext) throw std::invalid_argument("retry prompts are never refined with another retry");
    std::string out = render_preamble(base);
    out.append(failingTest);
    if (out.empty() || out.back() != '\n') out += '\n';
    out += '\n';
    out += std::string(kIndent) + "// the test above fails with the following error:\n";
    append_commented(out, errorMessage, std::string(kIndent) + "//   ");
    out += std::string(kIndent) + "// fixed test:\n";
    out += render_it_opener("test " + put_identifier(base.target.accessPath.package));
    return out;
}

std::optional<std::string> extract_it_block(std::string_view testSource) {
    const auto lexed = js::tokenize(testSource);
    if (lexed.error) return std::nullopt;
    const auto calls = js::find_calls(lexed.tokens, testSource, "it");
    if (calls.empty()) return std::nullopt;
    const auto& call = calls.front();
    const auto& callee = lexed.tokens[call.callee];

    auto begin = testSource.rfind('\n', callee.begin == 0 ? 0 : callee.begin - 1);
    begin = (begin == std::string_view::npos || callee.begin == 0) ? 0 : begin + 1;
    if (!text::trim(testSource.substr(begin, callee.begin - begin)).empty()) begin = callee.begin;

    std::size_t end = lexed.tokens[call.close].end;
    if (call.close + 1 < lexed.tokens.size()) {
        const auto& next = lexed.tokens[call.close + 1];
        if (next.kind == js::TokenKind::Punctuator && next.text(testSource) == ";" && !next.newlineBefore) {
            end = next.end;
        }
    }
    return std::string(testSource.substr(begin, end - begin));
}

Prompt make_base_prompt(const ApiFunction& target) {
    Prompt prompt;
    prompt.target = target;
    render_into(prompt);
    return prompt;
}

Prompt make_retry_prompt(const Prompt& base, std::string failingTest, std::string errorMessage) {
    if (base.retryContext) throw std::invalid_argument("retry prompts are never refined with another retry");
    Prompt prompt = base;
    prompt.retryContext = RetryContext{std::move(failingTest), std::move(errorMessage)};
    render_into(prompt);
    return prompt;
}

void render_into(Prompt& prompt) { prompt.renderedText = render_prompt(prompt); }

PromptPlan enumerate_prompts(const ApiFunction& target, const RefinerSet& enabled) {
    return PromptPlan{target, enumerate_prompts(std::vector<ApiFunction>{target}, enabled)};
}

std::vector<Prompt> enumerate_prompts(const std::vector<ApiFunction>& targets, const RefinerSet& enabled) {
    std::vector<Prompt> prompts;
    prompts.reserve(targets.size());
    for (const auto& target : targets) prompts.push_back(make_base_prompt(target));

    auto pass = [&](RefinerKind kind, auto applicable, auto apply) {
        if (!enabled.contains(kind)) return;
        const std::size_t existing = prompts.size();
        for (std::size_t i = 0; i < existing; ++i) {
            if (!applicable(prompts[i].target)) continue;
            Prompt refined = prompts[i];
            apply(refined);
            render_into(refined);
            prompts.push_back(std::move(refined));
        }
    };

    pass(
        RefinerKind::FnBody, [](const ApiFunction& f) { return f.sourceText.has_value(); },
        [](Prompt& p) { p.includeBody = true; });
    pass(
        RefinerKind::Snippet, [](const ApiFunction& f) { return !f.snippets.empty(); },
        [](Prompt& p) {
            p.includeSnippets = true;
            p.snippetLimit = p.target.snippets.size();
        });
    pass(
        RefinerKind::DocComment, [](const ApiFunction& f) { return f.docComment.has_value(); },
        [](Prompt& p) { p.includeDocComment = true; });
    return prompts;
}

std::size_t truncate_to_budget(Prompt& prompt, std::size_t maxChars) {
    if (maxChars == 0 || !prompt.includeSnippets) return 0;
    std::size_t dropped = 0;
    while (prompt.renderedText.size() > maxChars && prompt.snippetLimit > 1) {
        --prompt.snippetLimit;
        ++dropped;
        render_into(prompt);
    }
    return dropped;
}

}  // namespace pilotgen::prompts
