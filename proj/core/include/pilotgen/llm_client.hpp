#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pilotgen::llm {

enum class BackendKind { HttpEndpoint, ReplayCache, ScriptedMock };
enum class ApiStyle { Completions, Chat };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend(std::string_view name);  // http | replay | mock
std::string_view to_string(ApiStyle style);
std::optional<ApiStyle> parse_api_style(std::string_view name);

inline constexpr std::string_view kDefaultApiKeyEnvVar = "PILOTGEN_API_KEY";

struct ModelConfig {
    BackendKind backend = BackendKind::ReplayCache;
    std::string modelName = "gpt-3.5-turbo";
    double temperature = 0.0;
    int completionsPerPrompt = 5;
    int maxTokens = 100;
    std::optional<std::string> endpointUrl;
    std::string apiKeyEnvVar = std::string(kDefaultApiKeyEnvVar);
    ApiStyle apiStyle = ApiStyle::Completions;
    /// Rendered prompts longer than this lose snippets; 0 disables the check.
    std::size_t maxPromptChars = 16000;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct CompletionBatch {
    std::string promptHash;
    std::vector<std::string> completions;

    friend bool operator==(const CompletionBatch&, const CompletionBatch&) = default;
};

/// SHA-256 over the prompt text and the model identity (name, temperature,
/// completions per prompt, max tokens). The backend kind is not part of it,
/// so a cache recorded over HTTP replays under the same key.
std::string prompt_hash(std::string_view promptText, const ModelConfig& config);

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionBatch complete(std::string_view promptText, const ModelConfig& config) = 0;
};

/// Append-only JSONL store: {promptHash, modelName, params, completions}.
/// Later records for a hash shadow earlier ones.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path file);

    std::optional<CompletionBatch> lookup(const std::string& promptHash) const;
    void record(const CompletionBatch& batch, const ModelConfig& config);
    std::size_t size() const;
    const std::filesystem::path& file() const { return file_; }

private:
    std::filesystem::path file_;
    mutable std::mutex mutex_;
    std::map<std::string, CompletionBatch> entries_;
};

class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::shared_ptr<const ReplayCache> cache) : cache_(std::move(cache)) {}
    /// Throws CacheMiss.
    CompletionBatch complete(std::string_view promptText, const ModelConfig& config) override;

private:
    std::shared_ptr<const ReplayCache> cache_;
};

struct ScriptEntry {
    std::string match;  // prompt substring
    std::vector<std::string> completions;
};

/// Returns the completions of the first entry whose `match` occurs in the
/// prompt, or an empty batch when nothing matches.
class ScriptedMockBackend : public CompletionBackend {
public:
    explicit ScriptedMockBackend(std::vector<ScriptEntry> script) : script_(std::move(script)) {}
    static ScriptedMockBackend from_file(const std::filesystem::path& file);
    static std::vector<ScriptEntry> parse_script(const nlohmann::json& document);

    CompletionBatch complete(std::string_view promptText, const ModelConfig& config) override;

private:
    std::vector<ScriptEntry> script_;
};

struct HttpResponse {
    int status = 0;  // 0: transport failure
    std::string body;
    std::string error;
};

/// POSTs a JSON body; injected so the retry policy can be tested offline.
using HttpTransport = std::function<HttpResponse(const std::string& url, const std::string& bearerToken,
                                                 const std::string& jsonBody)>;

/// cpp-httplib based transport (HTTPS via OpenSSL).
HttpTransport default_http_transport(std::chrono::milliseconds timeout = std::chrono::seconds(60));

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initialBackoff{500};
};

/// Completion- or chat-style endpoint with bearer auth. Every successful
/// batch is recorded into the cache, when one is attached.
class HttpBackend : public CompletionBackend {
public:
    HttpBackend(HttpTransport transport, std::shared_ptr<ReplayCache> cache, RetryPolicy retry = {});

    /// Throws BackendUnavailable.
    CompletionBatch complete(std::string_view promptText, const ModelConfig& config) override;

    static std::string request_body(std::string_view promptText, const ModelConfig& config);
    static std::vector<std::string> parse_reply(std::string_view body, ApiStyle style);
    /// Removes a leading ```lang line and a trailing ``` from chat replies.
    static std::string strip_fences(std::string_view reply);

private:
    HttpTransport transport_;
    std::shared_ptr<ReplayCache> cache_;
    RetryPolicy retry_;
};

/// Front door used by the generator: applies the configured backend and
/// caps concurrent requests.
class LlmClient {
public:
    LlmClient(ModelConfig config, std::shared_ptr<CompletionBackend> backend, std::ptrdiff_t maxInFlight = 4);

    CompletionBatch get_completions(std::string_view promptText);
    const ModelConfig& config() const { return config_; }

private:
    ModelConfig config_;
    std::shared_ptr<CompletionBackend> backend_;
    std::counting_semaphore<64> limiter_;
};

}  // namespace pilotgen::llm
