#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pilotgen/metrics.hpp"

namespace {

void BM_MergeCoverage(benchmark::State& state) {
    std::vector<pilotgen::CoverageData> parts(static_cast<std::size_t>(state.range(0)));
    for (std::size_t t = 0; t < parts.size(); ++t) {
        auto& file = parts[t].perFile["index.js"];
        for (std::size_t s = 0; s < 500; ++s) file.statementHits[std::to_string(s)] = (s + t) % 3;
        for (std::size_t b = 0; b < 100; ++b) file.branchHits[std::to_string(b) + ".0"] = (b * t) % 2;
    }
    for (auto _ : state) benchmark::DoNotOptimize(pilotgen::metrics::merge_coverage(parts));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MergeCoverage)->RangeMultiplier(4)->Range(1, 256)->Complexity(benchmark::oN);

}  // namespace
