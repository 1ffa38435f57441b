#include "pilotgen/llm_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "pilotgen/errors.hpp"
#include "pilotgen/text.hpp"

namespace pilotgen::llm {

using nlohmann::json;

namespace {

json model_params(const ModelConfig& config) {
    return json{{"temperature", config.temperature},
                {"n", config.completionsPerPrompt},
                {"max_tokens", config.maxTokens}};
}

std::string default_url(ApiStyle style) {
    return style == ApiStyle::Chat ? "https://api.openai.com/v1/chat/completions"
                                   : "https://api.openai.com/v1/completions";
}

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(std::counting_semaphore<64>& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    std::counting_semaphore<64>& s_;
};

}  // namespace

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::HttpEndpoint: return "http";
        case BackendKind::ReplayCache: return "replay";
        case BackendKind::ScriptedMock: return "mock";
    }
    return "?";
}

std::optional<BackendKind> parse_backend(std::string_view name) {
    if (name == "http") return BackendKind::HttpEndpoint;
    if (name == "replay") return BackendKind::ReplayCache;
    if (name == "mock") return BackendKind::ScriptedMock;
    return std::nullopt;
}

std::string_view to_string(ApiStyle style) { return style == ApiStyle::Chat ? "chat" : "completions"; }

std::optional<ApiStyle> parse_api_style(std::string_view name) {
    if (name == "chat") return ApiStyle::Chat;
    if (name == "completions") return ApiStyle::Completions;
    return std::nullopt;
}

void ModelConfig::validate() const {
    if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    if (completionsPerPrompt < 1) throw std::invalid_argument("completions per prompt must be >= 1");
    if (maxTokens < 1) throw std::invalid_argument("max tokens must be >= 1");
    if (modelName.empty()) throw std::invalid_argument("model name must not be empty");
}

std::string prompt_hash(std::string_view promptText, const ModelConfig& config) {
    json identity = model_params(config);
    identity["model"] = config.modelName;
    std::string material = identity.dump();
    material += '\x1f';
    material.append(promptText);
    return text::sha256_hex(material);
}

ReplayCache::ReplayCache(std::filesystem::path file) : file_(std::move(file)) {
    std::ifstream in(file_);
    if (!in) return;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (text::trim(line).empty()) continue;
        try {
            const auto record = json::parse(line);
            CompletionBatch batch{record.at("promptHash").get<std::string>(),
                                  record.at("completions").get<std::vector<std::string>>()};
            entries_[batch.promptHash] = std::move(batch);
        } catch (const json::exception& e) {
            throw Error(file_.string() + ":" + std::to_string(lineNo) + ": malformed cache record: " + e.what());
        }
    }
}

std::optional<CompletionBatch> ReplayCache::lookup(const std::string& promptHash) const {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(promptHash); it != entries_.end()) return it->second;
    return std::nullopt;
}

void ReplayCache::record(const CompletionBatch& batch, const ModelConfig& config) {
    json record{{"promptHash", batch.promptHash},
                {"modelName", config.modelName},
                {"params", model_params(config)},
                {"completions", batch.completions}};
    std::lock_guard lock(mutex_);
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::app);
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to cache file " + file_.string());
    entries_[batch.promptHash] = batch;
}

std::size_t ReplayCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

CompletionBatch ReplayBackend::complete(std::string_view promptText, const ModelConfig& config) {
    const auto hash = prompt_hash(promptText, config);
    auto batch = cache_->lookup(hash);
    if (!batch) throw CacheMiss("no cached completions for prompt " + hash);
    return *batch;
}

ScriptedMockBackend ScriptedMockBackend::from_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open mock script " + file.string());
    try {
        return ScriptedMockBackend(parse_script(json::parse(in)));
    } catch (const json::exception& e) {
        throw Error("malformed mock script " + file.string() + ": " + e.what());
    }
}

std::vector<ScriptEntry> ScriptedMockBackend::parse_script(const json& document) {
    const json& entries = document.is_object() ? document.at("entries") : document;
    std::vector<ScriptEntry> script;
    for (const auto& entry : entries) {
        script.push_back({entry.at("match").get<std::string>(),
                          entry.at("completions").get<std::vector<std::string>>()});
    }
    return script;
}

CompletionBatch ScriptedMockBackend::complete(std::string_view promptText, const ModelConfig& config) {
    CompletionBatch batch{prompt_hash(promptText, config), {}};
    for (const auto& entry : script_) {
        if (promptText.find(entry.match) == std::string_view::npos) continue;
        const auto n = std::min<std::size_t>(entry.completions.size(), config.completionsPerPrompt);
        batch.completions.assign(entry.completions.begin(), entry.completions.begin() + n);
        break;
    }
    return batch;
}

HttpTransport default_http_transport(std::chrono::milliseconds timeout) {
    return [timeout](const std::string& url, const std::string& token, const std::string& body) -> HttpResponse {
        const auto schemeEnd = url.find("://");
        const auto pathStart = url.find('/', schemeEnd == std::string::npos ? 0 : schemeEnd + 3);
        const std::string origin = pathStart == std::string::npos ? url : url.substr(0, pathStart);
        const std::string path = pathStart == std::string::npos ? "/" : url.substr(pathStart);

        httplib::Client client(origin);
        const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
        client.set_connection_timeout(static_cast<time_t>(seconds));
        client.set_read_timeout(static_cast<time_t>(seconds));
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
        auto result = client.Post(path, headers, body, "application/json");
        if (!result) return HttpResponse{0, {}, httplib::to_string(result.error())};
        return HttpResponse{result->status, result->body, {}};
    };
}

HttpBackend::HttpBackend(HttpTransport transport, std::shared_ptr<ReplayCache> cache, RetryPolicy retry)
    : transport_(std::move(transport)), cache_(std::move(cache)), retry_(retry) {}

std::string HttpBackend::request_body(std::string_view promptText, const ModelConfig& config) {
    json body = model_params(config);
    body["model"] = config.modelName;
    if (config.apiStyle == ApiStyle::Chat) {
        body["messages"] = json::array({json{{"role", "user"}, {"content", std::string(promptText)}}});
    } else {
        body["prompt"] = std::string(promptText);
    }
    return body.dump();
}

std::string HttpBackend::strip_fences(std::string_view reply) {
    std::string_view s = reply;
    const auto firstContent = s.find_first_not_of(" \t\r\n");
    if (firstContent != std::string_view::npos && s.substr(firstContent, 3) == "```") {
        const auto nl = s.find('\n', firstContent);
        s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
    }
    const auto trimmed = text::trim_right(s);
    if (trimmed.size() >= 3 && trimmed.substr(trimmed.size() - 3) == "```") {
        s = trimmed.substr(0, trimmed.size() - 3);
    }
    return std::string(s);
}

std::vector<std::string> HttpBackend::parse_reply(std::string_view body, ApiStyle style) {
    const auto document = json::parse(body);
    std::vector<std::string> out;
    for (const auto& choice : document.at("choices")) {
        if (style == ApiStyle::Chat) {
            out.push_back(strip_fences(choice.at("message").at("content").get<std::string>()));
        } else {
            out.push_back(choice.at("text").get<std::string>());
        }
    }
    return out;
}

CompletionBatch HttpBackend::complete(std::string_view promptText, const ModelConfig& config) {
    const char* key = std::getenv(config.apiKeyEnvVar.c_str());
    if (key == nullptr || *key == '\0') {
        throw BackendUnavailable("environment variable " + config.apiKeyEnvVar + " is not set");
    }
    const std::string url = config.endpointUrl.value_or(default_url(config.apiStyle));
    const std::string body = request_body(promptText, config);

    std::string lastError;
    auto backoff = retry_.initialBackoff;
    for (int attempt = 1; attempt <= std::max(1, retry_.attempts); ++attempt) {
        const auto response = transport_(url, key, body);
        if (response.status >= 200 && response.status < 300) {
            CompletionBatch batch{prompt_hash(promptText, config), {}};
            try {
                batch.completions = parse_reply(response.body, config.apiStyle);
            } catch (const json::exception& e) {
                throw BackendUnavailable(std::string("malformed completion response: ") + e.what());
            }
            if (batch.completions.size() > static_cast<std::size_t>(config.completionsPerPrompt)) {
                batch.completions.resize(config.completionsPerPrompt);
            }
            if (cache_) cache_->record(batch, config);
            return batch;
        }
        const bool transient = response.status == 0 || response.status == 429 || response.status >= 500;
        lastError = response.status == 0 ? response.error
                                         : "HTTP " + std::to_string(response.status) + ": " + response.body;
        if (!transient) break;
        if (attempt < retry_.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw BackendUnavailable("completion request to " + url + " failed: " + lastError);
}

LlmClient::LlmClient(ModelConfig config, std::shared_ptr<CompletionBackend> backend, std::ptrdiff_t maxInFlight)
    : config_(std::move(config)), backend_(std::move(backend)), limiter_(std::clamp<std::ptrdiff_t>(maxInFlight, 1, 64)) {
    config_.validate();
}

CompletionBatch LlmClient::get_completions(std::string_view promptText) {
    SemaphoreGuard guard(limiter_);
    auto batch = backend_->complete(promptText, config_);
    if (batch.completions.size() > static_cast<std::size_t>(config_.completionsPerPrompt)) {
        batch.completions.resize(config_.completionsPerPrompt);
    }
    if (batch.promptHash.empty()) batch.promptHash = prompt_hash(promptText, config_);
    return batch;
}

}  // namespace pilotgen::llm
