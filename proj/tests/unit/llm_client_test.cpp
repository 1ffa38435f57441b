#include <gtest/gtest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pilotgen/errors.hpp"
#include "pilotgen/llm_client.hpp"

using namespace pilotgen;
using namespace pilotgen::llm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kKeyVar = "PILOTGEN_UNIT_TEST_KEY";

ModelConfig config(ApiStyle style = ApiStyle::Completions) {
    ModelConfig c;
    c.backend = BackendKind::HttpEndpoint;
    c.apiKeyEnvVar = kKeyVar;
    c.apiStyle = style;
    c.endpointUrl = "http://unused.invalid/v1/completions";
    return c;
}

fs::path temp_file(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pilotgen-llm-" + name);
    fs::remove(p);
    return p;
}

std::string completion_reply(std::vector<std::string> texts) {
    json choices = json::array();
    for (auto& t : texts) choices.push_back({{"text", t}});
    return json{{"choices", choices}}.dump();
}

}  // namespace

TEST(Hash, DependsOnPromptAndModelIdentityOnly) {
    auto a = config();
    const auto h = prompt_hash("p", a);
    EXPECT_EQ(h.size(), 64u);
    EXPECT_NE(h, prompt_hash("q", a));
    a.backend = BackendKind::ReplayCache;
    a.endpointUrl.reset();
    EXPECT_EQ(h, prompt_hash("p", a));
    a.temperature = 0.5;
    EXPECT_NE(h, prompt_hash("p", a));
    auto b = config();
    b.modelName = "other";
    EXPECT_NE(h, prompt_hash("p", b));
}

TEST(Config, Validation) {
    ModelConfig c;
    EXPECT_NO_THROW(c.validate());
    c.completionsPerPrompt = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.temperature = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_EQ(parse_backend("mock"), BackendKind::ScriptedMock);
    EXPECT_FALSE(parse_backend("openai"));
    EXPECT_EQ(parse_api_style("chat"), ApiStyle::Chat);
}

TEST(ReplayCache, RecordsAndReloads) {
    const auto file = temp_file("cache.jsonl");
    const auto c = config();
    {
        ReplayCache cache(file);
        EXPECT_EQ(cache.size(), 0u);
        cache.record({"h1", {"a", "b"}}, c);
        cache.record({"h2", {"c"}}, c);
        cache.record({"h1", {"z"}}, c);
        EXPECT_EQ(cache.lookup("h1")->completions, std::vector<std::string>{"z"});
    }
    ReplayCache reloaded(file);
    EXPECT_EQ(reloaded.size(), 2u);
    EXPECT_EQ(reloaded.lookup("h1")->completions, std::vector<std::string>{"z"});
    EXPECT_FALSE(reloaded.lookup("h3"));

    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    const auto record = json::parse(line);
    EXPECT_EQ(record.at("modelName"), c.modelName);
    EXPECT_EQ(record.at("params").at("n"), c.completionsPerPrompt);
    fs::remove(file);
}

TEST(ReplayCache, MalformedLineIsAnError) {
    const auto file = temp_file("bad.jsonl");
    std::ofstream(file) << "{not json}\n";
    EXPECT_THROW(ReplayCache{file}, Error);
    fs::remove(file);
}

TEST(ReplayBackend, HitAndMiss) {
    const auto file = temp_file("replay.jsonl");
    auto cache = std::make_shared<ReplayCache>(file);
    const auto c = config();
    cache->record({prompt_hash("prompt", c), {"x"}}, c);
    ReplayBackend backend(cache);
    EXPECT_EQ(backend.complete("prompt", c).completions, std::vector<std::string>{"x"});
    EXPECT_THROW(backend.complete("other", c), CacheMiss);
    fs::remove(file);
}

TEST(MockBackend, FirstMatchWinsAndRespectsCount) {
    ScriptedMockBackend mock({{"foo", {"1", "2", "3"}}, {"fo", {"never"}}});
    auto c = config();
    c.completionsPerPrompt = 2;
    EXPECT_EQ(mock.complete("xx foo", c).completions, (std::vector<std::string>{"1", "2"}));
    EXPECT_TRUE(mock.complete("bar", c).completions.empty());
    const auto parsed = ScriptedMockBackend::parse_script(json::parse(R"([{"match": "m", "completions": ["c"]}])"));
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_EQ(parsed[0].match, "m");
}

TEST(HttpBackend, RequestBodies) {
    const auto completions = json::parse(HttpBackend::request_body("P", config()));
    EXPECT_EQ(completions.at("prompt"), "P");
    EXPECT_EQ(completions.at("n"), 5);
    EXPECT_EQ(completions.at("max_tokens"), 100);
    EXPECT_EQ(completions.at("temperature"), 0.0);
    const auto chat = json::parse(HttpBackend::request_body("P", config(ApiStyle::Chat)));
    EXPECT_EQ(chat.at("messages").at(0).at("content"), "P");
    EXPECT_FALSE(chat.contains("prompt"));
}

TEST(HttpBackend, ParsesRepliesAndStripsFences) {
    EXPECT_EQ(HttpBackend::parse_reply(completion_reply({"a", "b"}), ApiStyle::Completions),
              (std::vector<std::string>{"a", "b"}));
    const std::string chat = R"({"choices": [{"message": {"content": "```js\nx();\n```\n"}}]})";
    EXPECT_EQ(HttpBackend::parse_reply(chat, ApiStyle::Chat), std::vector<std::string>{"x();\n"});
    EXPECT_EQ(HttpBackend::strip_fences("plain"), "plain");
}

TEST(HttpBackend, MissingKeyIsUnavailable) {
    ::unsetenv(kKeyVar);
    HttpBackend backend([](auto&&...) { return HttpResponse{200, completion_reply({"x"}), {}}; }, nullptr);
    EXPECT_THROW(backend.complete("p", config()), BackendUnavailable);
}

TEST(HttpBackend, RetriesTransientFailuresThenRecords) {
    ::setenv(kKeyVar, "secret", 1);
    int calls = 0;
    std::string seenToken;
    auto transport = [&](const std::string&, const std::string& token, const std::string&) {
        seenToken = token;
        return ++calls < 3 ? HttpResponse{calls == 1 ? 0 : 503, "", "connection refused"}
                           : HttpResponse{200, completion_reply({"a", "b", "c", "d", "e", "f"}), {}};
    };
    const auto file = temp_file("http.jsonl");
    auto cache = std::make_shared<ReplayCache>(file);
    HttpBackend backend(transport, cache, RetryPolicy{3, std::chrono::milliseconds(1)});
    const auto batch = backend.complete("p", config());
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(seenToken, "secret");
    EXPECT_EQ(batch.completions.size(), 5u);
    EXPECT_EQ(cache->lookup(prompt_hash("p", config()))->completions, batch.completions);
    fs::remove(file);
}

TEST(HttpBackend, AuthFailureIsNotRetried) {
    ::setenv(kKeyVar, "secret", 1);
    int calls = 0;
    HttpBackend backend(
        [&](auto&&...) {
            ++calls;
            return HttpResponse{401, "unauthorized", {}};
        },
        nullptr, RetryPolicy{3, std::chrono::milliseconds(1)});
    EXPECT_THROW(backend.complete("p", config()), BackendUnavailable);
    EXPECT_EQ(calls, 1);
}

TEST(HttpBackend, GivesUpAfterRetryBudget) {
    ::setenv(kKeyVar, "secret", 1);
    int calls = 0;
    HttpBackend backend(
        [&](auto&&...) {
            ++calls;
            return HttpResponse{429, "slow down", {}};
        },
        nullptr, RetryPolicy{2, std::chrono::milliseconds(1)});
    EXPECT_THROW(backend.complete("p", config()), BackendUnavailable);
    EXPECT_EQ(calls, 2);
}

TEST(HttpTransport, TalksToLocalServer) {
    httplib::Server server;
    std::string auth, body;
    server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        body = req.body;
        res.set_content(completion_reply({"    done();\n"}), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv(kKeyVar, "k-123", 1);
    auto c = config();
    c.endpointUrl = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
    HttpBackend backend(default_http_transport(std::chrono::seconds(5)), nullptr);
    const auto batch = backend.complete("prompt text", c);
    server.stop();
    thread.join();

    EXPECT_EQ(batch.completions, std::vector<std::string>{"    done();\n"});
    EXPECT_EQ(auth, "Bearer k-123");
    EXPECT_EQ(json::parse(body).at("prompt"), "prompt text");
}

TEST(HttpTransport, ConnectionFailureIsStatusZero) {
    const auto response = default_http_transport(std::chrono::seconds(1))("http://127.0.0.1:1/x", "", "{}");
    EXPECT_EQ(response.status, 0);
    EXPECT_FALSE(response.error.empty());
}

TEST(Client, CapsCompletionsAndFillsHash) {
    class Loose : public CompletionBackend {
    public:
        CompletionBatch complete(std::string_view, const ModelConfig&) override { return {"", {"1", "2", "3"}}; }
    };
    ModelConfig c;
    c.completionsPerPrompt = 2;
    LlmClient client(c, std::make_shared<Loose>(), 2);
    const auto batch = client.get_completions("p");
    EXPECT_EQ(batch.completions.size(), 2u);
    EXPECT_EQ(batch.promptHash, prompt_hash("p", c));
}

TEST(Client, RejectsInvalidConfig) {
    ModelConfig c;
    c.maxTokens = 0;
    EXPECT_THROW(LlmClient(c, std::make_shared<ScriptedMockBackend>(std::vector<ScriptEntry>{})), std::invalid_argument);
}
