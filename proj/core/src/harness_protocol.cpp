#include <stdexcept>

#include "pilotgen/errors.hpp"
#include "pilotgen/harness.hpp"

namespace pilotgen {

using nlohmann::json;

void to_json(json& j, const AccessPath& path) {
    json components = json::array();
    for (const auto& c : path.components) {
        if (const auto* index = std::get_if<std::uint64_t>(&c)) {
            components.push_back(*index);
        } else {
            components.push_back(std::get<std::string>(c));
        }
    }
    j = json{{"package", path.package}, {"components", std::move(components)}};
}

void from_json(const json& j, AccessPath& path) {
    path.package = j.at("package").get<std::string>();
    path.components.clear();
    for (const auto& c : j.at("components")) {
        if (c.is_number_unsigned() || c.is_number_integer()) {
            const auto value = c.get<std::int64_t>();
            if (value < 0) throw std::invalid_argument("negative index in access path");
            path.components.emplace_back(static_cast<std::uint64_t>(value));
        } else {
            path.components.emplace_back(c.get<std::string>());
        }
    }
}

void to_json(json& j, const SourceRange& range) {
    j = json{{"file", range.file}, {"startLine", range.startLine}, {"endLine", range.endLine}};
}

void from_json(const json& j, SourceRange& range) {
    range.file = j.at("file").get<std::string>();
    range.startLine = j.at("startLine").get<int>();
    range.endLine = j.at("endLine").get<int>();
}

}  // namespace pilotgen

namespace pilotgen::harness {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
    if (value) j[key] = *value;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& value) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        value = it->get<T>();
    } else {
        value.reset();
    }
}

json spans_to_json(const std::vector<Span>& spans) {
    json out = json::array();
    for (const auto& s : spans) out.push_back({s.begin, s.end});
    return out;
}

std::vector<Span> spans_from_json(const json& j) {
    std::vector<Span> out;
    for (const auto& pair : j) out.push_back({pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>()});
    return out;
}

}  // namespace

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Pass: return "pass";
        case RunStatus::AssertionFailure: return "assertionFailure";
        case RunStatus::Crash: return "crash";
        case RunStatus::Timeout: return "timeout";
    }
    return "?";
}

TestStatus to_test_status(RunStatus status) {
    switch (status) {
        case RunStatus::Pass: return TestStatus::Pass;
        case RunStatus::AssertionFailure: return TestStatus::AssertionFailure;
        case RunStatus::Crash: return TestStatus::Crash;
        case RunStatus::Timeout: return TestStatus::Timeout;
    }
    return TestStatus::Crash;
}

void to_json(json& j, const ExploreRequest& r) {
    j = json{{"putName", r.putName}, {"putPath", r.putPath}, {"exploreFunctionProps", r.exploreFunctionProps}};
}

void from_json(const json& j, ExploreRequest& r) {
    r.putName = j.at("putName").get<std::string>();
    r.putPath = j.value("putPath", std::string{});
    r.exploreFunctionProps = j.value("exploreFunctionProps", true);
}

void to_json(json& j, const ExploredFunction& f) {
    j = json{{"accessPath", f.function.accessPath}, {"paramNames", f.function.paramNames}};
    put_optional(j, "sourceText", f.function.sourceText);
    put_optional(j, "sourceRange", f.function.sourceRange);
    put_optional(j, "docCommentCandidate", f.docCommentCandidate);
}

void from_json(const json& j, ExploredFunction& f) {
    f.function = ApiFunction{};
    f.function.accessPath = j.at("accessPath").get<AccessPath>();
    f.function.paramNames = j.value("paramNames", std::vector<std::string>{});
    get_optional(j, "sourceText", f.function.sourceText);
    get_optional(j, "sourceRange", f.function.sourceRange);
    get_optional(j, "docCommentCandidate", f.docCommentCandidate);
}

void to_json(json& j, const ExploreResult& r) {
    j = json{{"functions", r.functions}, {"skippedGetters", r.skippedGetters}};
}

void from_json(const json& j, ExploreResult& r) {
    r.functions = j.at("functions").get<std::vector<ExploredFunction>>();
    r.skippedGetters = j.value("skippedGetters", 0);
}

void to_json(json& j, const CheckResult& r) {
    j = json{{"valid", r.valid},
             {"editList",
              {{"comments", spans_to_json(r.edits.comments)},
               {"describeArgs", spans_to_json(r.edits.describeArgs)},
               {"itArgs", spans_to_json(r.edits.itArgs)}}},
             {"statementBoundaries", r.statementBoundaries}};
    put_optional(j, "repaired", r.repaired);
}

void from_json(const json& j, CheckResult& r) {
    r.valid = j.at("valid").get<bool>();
    get_optional(j, "repaired", r.repaired);
    r.edits = {};
    if (auto it = j.find("editList"); it != j.end()) {
        r.edits.comments = spans_from_json(it->value("comments", json::array()));
        r.edits.describeArgs = spans_from_json(it->value("describeArgs", json::array()));
        r.edits.itArgs = spans_from_json(it->value("itArgs", json::array()));
    }
    r.statementBoundaries = j.value("statementBoundaries", std::vector<std::size_t>{});
}

void to_json(json& j, const StatementFacts& s) {
    j = json{{"id", s.id},
             {"defs", s.defs},
             {"uses", s.uses},
             {"isAssertion", s.isAssertion},
             {"importsPut", s.importsPut}};
}

void from_json(const json& j, StatementFacts& s) {
    s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    s.defs = j.value("defs", std::vector<std::string>{});
    s.uses = j.value("uses", std::vector<std::string>{});
    s.isAssertion = j.value("isAssertion", false);
    s.importsPut = j.value("importsPut", false);
}

void to_json(json& j, const AnalysisFacts& a) {
    json edges = json::array();
    for (const auto& [from, to] : a.orderEdges) edges.push_back({from, to});
    j = json{{"statements", a.statements}, {"orderEdges", std::move(edges)}};
}

void from_json(const json& j, AnalysisFacts& a) {
    a.statements = j.at("statements").get<std::vector<StatementFacts>>();
    a.orderEdges.clear();
    for (const auto& edge : j.value("orderEdges", json::array())) {
        auto id = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        a.orderEdges.emplace_back(id(edge.at(0)), id(edge.at(1)));
    }
}

void to_json(json& j, const RunRequest& r) {
    j = json{{"source", r.source}, {"timeoutMs", r.timeoutMs}, {"coverage", r.coverage}, {"putPath", r.putPath}};
}

void from_json(const json& j, RunRequest& r) {
    r.source = j.at("source").get<std::string>();
    r.timeoutMs = j.value("timeoutMs", 2000);
    r.coverage = j.value("coverage", true);
    r.putPath = j.value("putPath", std::string{});
}

void to_json(json& j, const RunResult& r) {
    j = json{{"status", std::string(to_string(r.status))}, {"durationMs", r.durationMs}};
    put_optional(j, "errorMessage", r.errorMessage);
    if (r.coverageReport) j["coverageReport"] = *r.coverageReport;
}

void from_json(const json& j, RunResult& r) {
    const auto status = j.at("status").get<std::string>();
    if (status == "pass") r.status = RunStatus::Pass;
    else if (status == "assertionFailure") r.status = RunStatus::AssertionFailure;
    else if (status == "crash") r.status = RunStatus::Crash;
    else if (status == "timeout" || status == "nonTermination") r.status = RunStatus::Timeout;
    else throw std::invalid_argument("unknown run status '" + status + "'");
    get_optional(j, "errorMessage", r.errorMessage);
    r.durationMs = j.value("durationMs", std::int64_t{0});
    if (auto it = j.find("coverageReport"); it != j.end() && !it->is_null()) {
        r.coverageReport = *it;
    } else {
        r.coverageReport.reset();
    }
}

json JsonHarness::call(const std::string& cmd, json payload, std::chrono::milliseconds timeout) {
    const std::uint64_t id = nextId_++;
    const json request{{"id", id}, {"cmd", cmd}, {"payload", std::move(payload)}};
    json response = exchange(request, timeout);
    if (!response.is_object() || response.value("id", std::uint64_t{0}) != id) {
        throw HarnessCrash("harness response does not match request " + std::to_string(id), {});
    }
    if (!response.value("ok", false)) {
        const json error = response.value("error", json::object());
        throw HarnessError(error.value("kind", std::string("Error")), error.value("message", std::string{}));
    }
    return response.value("payload", json::object());
}

ExploreResult JsonHarness::explore(const ExploreRequest& request) {
    try {
        return call("explore", request, std::chrono::milliseconds::zero()).get<ExploreResult>();
    } catch (const HarnessError& e) {
        throw ExplorationFailure(e.kind() + ": " + e.what());
    } catch (const json::exception& e) {
        throw ExplorationFailure(std::string("malformed explore response: ") + e.what());
    }
}

CheckResult JsonHarness::check(const std::string& source) {
    try {
        return call("check", json{{"source", source}}, std::chrono::milliseconds::zero()).get<CheckResult>();
    } catch (const json::exception& e) {
        throw HarnessCrash(std::string("malformed check response: ") + e.what(), {});
    }
}

AnalysisFacts JsonHarness::analyze(const std::string& source, const std::string& putName) {
    try {
        return call("analyze", json{{"source", source}, {"putName", putName}}, std::chrono::milliseconds::zero())
            .get<AnalysisFacts>();
    } catch (const HarnessError& e) {
        throw AnalysisFailure(e.kind() + ": " + e.what());
    } catch (const json::exception& e) {
        throw AnalysisFailure(std::string("malformed analyze response: ") + e.what());
    }
}

RunResult JsonHarness::run(const RunRequest& request) {
    try {
        return call("run", request, std::chrono::milliseconds(request.timeoutMs) + kResponseGrace).get<RunResult>();
    } catch (const HarnessError& e) {
        throw HarnessCrash(e.kind() + ": " + e.what(), {});
    } catch (const json::exception& e) {
        throw HarnessCrash(std::string("malformed run response: ") + e.what(), {});
    } catch (const std::invalid_argument& e) {
        throw HarnessCrash(e.what(), {});
    }
}

}  // namespace pilotgen::harness
