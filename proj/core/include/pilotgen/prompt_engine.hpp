#pragma once

// Prompt rendering. A prompt is the head of a Mocha test file, cut off just
// after the `it(...)` opener, so that a completion model continues with the
// test body:
//
//   let mocha = require('mocha');
//   let assert = require('assert');
//   let <id> = require('<package>');
//   <metadata comments>
//   // <access path>(<params>)
//   describe('test <id>', function() {
//       it('test <access path>', function(done) {
//
// Metadata appears in a fixed order: usage snippets, doc comment, function
// body. The signature comment is always the last line before `describe`.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilotgen/model.hpp"

namespace pilotgen::prompts {

/// Every character outside [A-Za-z0-9_] becomes `_`; a leading digit gets a
/// `_` prefix.
std::string put_identifier(std::string_view putName);

std::string render_signature(const ApiFunction& target);

std::string render_metadata_block(const Prompt& prompt);

/// Header, metadata and the `describe` line (everything before the `it`).
std::string render_preamble(const Prompt& prompt);

std::string render_it_opener(std::string_view description);

std::string render_prompt(const Prompt& prompt);

/// Text a completion is appended to when assembling a test. For ordinary
/// prompts this is the prompt itself; for retry prompts it is the preamble
/// plus the fresh `it` opener, so the failing test is not part of the new one.
std::string candidate_prefix(const Prompt& prompt);

std::string render_base_prompt(const ApiFunction& target, std::string_view putName);

/// Retry prompt for a failed test. `failingTest` is the complete failing
/// `it(...)` block. Throws std::invalid_argument if `base` is itself a retry.
std::string render_retry_prompt(const Prompt& base, std::string_view failingTest, std::string_view errorMessage);

/// The `it(...)` call of a complete test, from the start of its line through
/// its closing parenthesis (and `;` if one follows directly).
std::optional<std::string> extract_it_block(std::string_view testSource);

Prompt make_base_prompt(const ApiFunction& target);
/// Base prompt plus a retry context; renders the retry text.
Prompt make_retry_prompt(const Prompt& base, std::string failingTest, std::string errorMessage);
/// Re-renders after flag changes.
void render_into(Prompt& prompt);

struct PromptPlan {
    ApiFunction target;
    std::vector<Prompt> combinations;  // base first
};

/// All subsets of the applicable enabled metadata refiners, built by
/// successive passes in the order body, snippets, doc comment. Retry
/// prompts are never pre-enumerated.
PromptPlan enumerate_prompts(const ApiFunction& target, const RefinerSet& enabled);

/// Same passes over a whole API: all base prompts first, then each
/// refinement pass appended in turn.
std::vector<Prompt> enumerate_prompts(const std::vector<ApiFunction>& targets, const RefinerSet& enabled);

/// Drops snippets from the end until the rendered prompt fits `maxChars`
/// (0 = unlimited). Returns the number of snippets dropped.
std::size_t truncate_to_budget(Prompt& prompt, std::size_t maxChars);

}  // namespace pilotgen::prompts
