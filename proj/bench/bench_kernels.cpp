// Serial reference kernels against their OpenMP counterparts. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "tunescape/cache.hpp"
#include "tunescape/landscape.hpp"
#include "tunescape/serial.hpp"

using namespace tunescape;

namespace {

const SearchSpaceSpec& space(const std::string& name) {
  static std::map<std::string, SearchSpaceSpec> loaded;
  auto it = loaded.find(name);
  if (it == loaded.end())
    it = loaded.emplace(name, load_space_spec(std::string(TUNESCAPE_SPACES_DIR) + "/" + name + ".spec")).first;
  return it->second;
}

TuningCache synthetic_cache(const std::string& name, const std::string& device, std::uint64_t seed) {
  const auto& s = space(name);
  auto cache = TuningCache::for_space(s, device);
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> t(0.0, 1.0);
  s.for_each_config([&](const Configuration& c) {
    const double ms = t(rng);
    cache.insert(Observation::success(s.key(c), {ms}, ms, s.compute_metric(ms, c)));
  });
  return cache;
}

const TuningCache& hotspot_cache() {
  static const auto c = synthetic_cache("hotspot", "dev", 1);
  return c;
}

const Digraph& hotspot_graph() {
  static const auto g = build_ffg(hotspot_cache(), space("hotspot"), NeighborScheme::hamming1).graph();
  return g;
}

const CacheSet& four_devices() {
  static const CacheSet set = [] {
    CacheSet s;
    std::uint64_t seed = 10;
    for (const std::string d : {"W6600", "MI250X", "A4000", "A100"}) s[d] = synthetic_cache("hotspot", d, seed++);
    return s;
  }();
  return set;
}

const std::vector<std::string> kDevices{"W6600", "MI250X", "A4000", "A100"};

void BM_pagerank_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::pagerank(hotspot_graph()));
}
void BM_pagerank_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(pagerank(hotspot_graph()));
}
void BM_build_ffg_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::build_ffg(hotspot_cache(), space("hotspot"), NeighborScheme::hamming1));
}
void BM_build_ffg_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_ffg(hotspot_cache(), space("hotspot"), NeighborScheme::hamming1));
}
void BM_count_valid_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::count_valid(space("hotspot")));
}
void BM_count_valid_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(space("hotspot").count_valid());
}
void BM_portability_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::best_portable_config(four_devices(), kDevices));
}
void BM_portability_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(best_portable_config(four_devices(), kDevices));
}

}  // namespace

BENCHMARK(BM_pagerank_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pagerank_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_build_ffg_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_ffg_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_count_valid_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_count_valid_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_portability_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_portability_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
