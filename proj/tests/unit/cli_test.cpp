#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

#ifdef PILOTGEN_CLI

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pilotgen-cli-" + std::to_string(::getpid()) + "-" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(const std::string& args) {
        const auto errFile = dir_ / "stderr.txt";
        const std::string cmd = std::string(PILOTGEN_CLI) + " " + args + " 2>" + errFile.string();
        Result r;
        FILE* pipe = ::popen(cmd.c_str(), "r");
        if (!pipe) return r;
        char buf[512];
        while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
        const int status = ::pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.err = slurp(errFile);
        return r;
    }

    std::string harness(const std::string& fixture = "mini-pkg/fake-harness.json") {
        return std::string("--harness-cmd '") + PILOTGEN_FAKE_HARNESS + " --fixture " + fixture + "'";
    }

    std::string generate_mock() {
        auto r = run("generate --put-path mini-pkg --backend mock --mock-script mini-pkg/mock-script.json " +
                     harness() + " --out " + (dir_ / "out").string());
        EXPECT_EQ(r.code, 0) << r.err;
        while (!r.out.empty() && r.out.back() == '\n') r.out.pop_back();
        return r.out;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("generate --backend nope --put-name x").code, 1);
    const auto r = run("--json-errors generate --put-path mini-pkg --disable-refiner Bogus --backend mock");
    EXPECT_EQ(r.code, 1);
    const auto err = json::parse(r.err);
    EXPECT_EQ(err.at("error").at("kind"), "UsageError");
    EXPECT_EQ(err.at("error").at("exitCode"), 1);
}

TEST_F(Cli, HelpExitsZero) {
    const auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("generate"), std::string::npos);
}

TEST_F(Cli, LoadFailureExitsTwo) {
    const auto fixture = dir_ / "broken.json";
    std::ofstream(fixture) << json{{"exploreError", {{"kind", "LoadError"}, {"message", "Cannot find module"}}}}.dump();
    const auto r = run("--json-errors explore --put-path mini-pkg " + harness(fixture.string()) + " --out " +
                       (dir_ / "out").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err).at("error").at("kind"), "ExplorationFailure");
}

TEST_F(Cli, EmptyReplayCacheExitsThree) {
    const auto r = run("generate --put-path mini-pkg --backend replay --seed-cache " +
                       (dir_ / "empty.jsonl").string() + " " + harness() + " --out " + (dir_ / "out").string());
    EXPECT_EQ(r.code, 3);
}

TEST_F(Cli, ExploreAndMine) {
    const auto out = (dir_ / "out").string();
    auto r = run("explore --put-path mini-pkg " + harness() + " --out " + out);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(slurp(dir_ / "out" / "api.json")).size(), 5u);
    r = run("mine --put-path mini-pkg " + harness() + " --out " + out);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "out" / "mined-docs.json"));
}

TEST_F(Cli, GenerateReportSimilarity) {
    const fs::path runDir = generate_mock();
    ASSERT_TRUE(fs::is_directory(runDir));
    EXPECT_EQ(json::parse(slurp(runDir / "run-meta.json")).at("counts").at("prompts"), 12);

    auto r = run("report " + runDir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(slurp(runDir / "report.json")).at("passing").at("count"), 10);
    EXPECT_TRUE(fs::exists(runDir / "report.md"));

    r = run("report " + runDir.string() + " --per-function-mode targeting-tests");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(slurp(runDir / "report.json")).at("perFunctionMode"), "targeting-tests");
    EXPECT_EQ(run("report " + runDir.string() + " --per-function-mode bogus").code, 1);

    r = run("similarity " + runDir.string() + " mini-pkg/test");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(runDir / "similarity.csv");
    EXPECT_EQ(csv.rfind("testId,maxSimilarity,nearestExistingTestId\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}

TEST_F(Cli, ReplayMetaReproducesRun) {
    const fs::path first = generate_mock();
    const auto r = run("generate --replay-meta " + (first / "run-meta.json").string() + " " + harness() + " --out " +
                       (dir_ / "out").string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(slurp(fs::path(r.out.substr(0, r.out.find('\n'))) / "run-meta.json")).at("counts"),
              json::parse(slurp(first / "run-meta.json")).at("counts"));
}

#endif
