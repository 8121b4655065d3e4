#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "dnslsh/digest.hpp"
#include "dnslsh/features.hpp"
#include "dnslsh/ingest.hpp"
#include "dnslsh/nilsimsa.hpp"
#include "dnslsh/pipeline.hpp"
#include "dnslsh/rolling.hpp"
#include "dnslsh/segment.hpp"
#include "dnslsh/suffix.hpp"
#include "dnslsh/synth.hpp"

namespace {

using namespace dnslsh;

std::vector<std::string> subdomains(std::size_t count, std::uint64_t seed) {
  std::vector<std::string> out;
  for (const auto& r : generate(default_profile(SynthKind::TunnelUpload, "bench.com", count, seed))) {
    out.push_back(strip_delimiters(r.qname.substr(0, r.qname.size() - 10), kDefaultDelimiters));
  }
  return out;
}

std::vector<QueryDigests> digests(std::size_t count, const HashConfig& config) {
  std::vector<QueryDigests> out;
  for (const auto& s : subdomains(count, 7)) out.push_back(digest_query(s, config));
  return out;
}

void BM_NilsimsaDigest(benchmark::State& state) {
  const auto inputs = subdomains(64, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilsimsa_digest(inputs[i++ % inputs.size()], ThresholdMode::Median));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NilsimsaDigest);

void BM_Compare(benchmark::State& state) {
  const auto a = nilsimsa_digest("aGVsbG8gd29ybGQ", ThresholdMode::Median);
  const auto b = nilsimsa_digest("aGVsbG8gd29ybGR", ThresholdMode::Median);
  for (auto _ : state) benchmark::DoNotOptimize(compare(a, b));
}
BENCHMARK(BM_Compare);

void BM_FeaturizeWindow(benchmark::State& state) {
  FeatureMetadata meta;
  meta.window_size = static_cast<int>(state.range(0));
  const auto window = digests(static_cast<std::size_t>(meta.window_size), meta.hash);
  for (auto _ : state) benchmark::DoNotOptimize(featurize_digests(window, meta));
}
BENCHMARK(BM_FeaturizeWindow)->Arg(5)->Arg(20)->Arg(50);

void BM_RollingUpdate(benchmark::State& state) {
  FeatureMetadata meta;
  meta.window_size = static_cast<int>(state.range(0));
  const auto stream = digests(256, meta.hash);
  RollingState rolling(meta);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rolling.update(stream[i++ % stream.size()]));
}
BENCHMARK(BM_RollingUpdate)->Arg(5)->Arg(20)->Arg(50);

void BM_Predict(benchmark::State& state) {
  FeaturizeOptions options;
  const auto set = featurize_records(generate_corpus(3000, 3000, 1), SuffixRules::bundled(), options);
  const auto model = train_task_model(set, Task::Binary, ForestParams{}, 42);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(set.rows[i++ % set.rows.size()].values));
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
