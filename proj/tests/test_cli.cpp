#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "tunescape/cache.hpp"
#include "tunescape/landscape.hpp"
#include "tunescape/measure.hpp"
#include "tunescape/strategies.hpp"

using namespace tunescape;

namespace {

ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), TUNESCAPE_CLI);
  return run_process(args, {}, {}, std::chrono::milliseconds(60000));
}

const std::string kSpaces = TUNESCAPE_SPACES_DIR;

}  // namespace

TEST_CASE("cli analyze stats") {
  TempDir dir;
  write_cache(oracle::perf_cache({1, 2, 100}), dir / "c.json");
  const auto r = cli({"analyze", "stats", "--cache", (dir / "c.json").string()});
  CHECK(r.exit_code == 0);
  CHECK(r.standard_output.find("median   2\n") != std::string::npos);
  CHECK(r.standard_output.find("maximum  100\n") != std::string::npos);
  CHECK(r.standard_output.find("impact   50.0x\n") != std::string::npos);

  write_cache(oracle::perf_cache({}), dir / "empty.json");
  const auto e = cli({"analyze", "stats", "--cache", (dir / "empty.json").string()});
  CHECK(e.exit_code == 1);
  CHECK(e.standard_error.find("NoFeasibleData") != std::string::npos);
  CHECK(e.standard_output.empty());
}

TEST_CASE("cli usage errors") {
  const auto r = cli({"analyze", "stats", "--bogus"});
  CHECK(r.exit_code == 2);
  CHECK(r.standard_error.find("Usage") != std::string::npos);
  CHECK(cli({}).exit_code == 2);
  CHECK(cli({"tune", "--space", kSpaces + "/gemm.spec"}).exit_code == 2);
  CHECK(cli({"--help"}).exit_code == 0);
}

TEST_CASE("cli tune is deterministic and matches the library") {
  TempDir dir;
  const auto space = load_space_spec(kSpaces + "/dedispersion.spec");
  std::map<std::string, double> times;
  double t = 1.0;
  for (const auto& c : space.enumerate()) times[space.key(c)] = (t = t * 1.37 - (t > 50 ? 49 : 0));
  write_cache(oracle::make_cache(space, times, "A100"), dir / "src.json");
  const std::string backend = "sim:" + (dir / "src.json").string();

  for (const std::string strategy : {"random", "local"}) {
    const auto a = cli({"tune", "--space", kSpaces + "/dedispersion.spec", "--backend", backend, "--strategy",
                        strategy, "--budget", "50", "--seed", "7", "--out", (dir / "a.json").string()});
    const auto b = cli({"tune", "--space", kSpaces + "/dedispersion.spec", "--backend", backend, "--strategy",
                        strategy, "--budget", "50", "--seed", "7", "--out", (dir / "b.json").string()});
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));
    CHECK(a.standard_output == b.standard_output);
  }

  SimulatedBackend sim(read_cache(dir / "src.json"), space);
  const auto lib = random_search(space, sim, {}, Budget{50}, 7);
  cli({"tune", "--space", kSpaces + "/dedispersion.spec", "--backend", backend, "--strategy", "random", "--budget",
       "50", "--seed", "7", "--device", "A100", "--out", (dir / "r.json").string()});
  CHECK(read_file(dir / "r.json") == serialize_cache(trace_to_cache(space, lib, "A100")));
}

TEST_CASE("cli analyses equal the library results") {
  TempDir dir;
  const auto space = load_space_spec(kSpaces + "/convolution.spec");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  CacheSet caches;
  for (const std::string dev : {"W6600", "A100"}) {
    std::map<std::string, double> times;
    for (const auto& c : space.enumerate()) times[space.key(c)] = u(rng);
    caches[dev] = oracle::make_cache(space, times, dev);
    write_cache(caches[dev], dir / (dev + ".json"));
  }
  const std::string w = (dir / "W6600.json").string();
  const std::string a = (dir / "A100.json").string();

  REQUIRE(cli({"analyze", "centrality", "--cache", w, "--space", kSpaces + "/convolution.spec", "--scheme",
               "adjacent", "--p-max", "0.15", "--out", (dir / "c.csv").string()})
              .exit_code == 0);
  CHECK(read_file(dir / "c.csv") ==
        centrality_csv(centrality_curve(build_ffg(caches["W6600"], space, NeighborScheme::adjacent))));

  const std::vector<std::string> subset{"W6600", "A100"};
  REQUIRE(cli({"analyze", "portability", "--caches", w + "," + a, "--subset", "W6600,A100", "--out",
               (dir / "p.json").string()})
              .exit_code == 0);
  CHECK(read_file(dir / "p.json") == portability_json(*best_portable_config(caches, subset)));

  REQUIRE(cli({"export", "dist", "--cache", w, "--out", (dir / "d.csv").string(), "--quantiles-out",
               (dir / "q.csv").string()})
              .exit_code == 0);
  CHECK(read_file(dir / "d.csv") == distribution_csv(export_distribution(caches["W6600"])));
  CHECK(read_file(dir / "q.csv") == quantiles_csv(export_distribution(caches["W6600"])));

  REQUIRE(cli({"export", "ffg", "--cache", w, "--space", kSpaces + "/convolution.spec", "--out",
               (dir / "g.dot").string()})
              .exit_code == 0);
  CHECK(read_file(dir / "g.dot") == export_dot(build_ffg(caches["W6600"], space, NeighborScheme::hamming1)));

  const auto topk = cli({"analyze", "topk", "--cache", w, "-k", "3"});
  REQUIRE(topk.exit_code == 0);
  const auto best = top_k(caches["W6600"], 3);
  CHECK(topk.standard_output.find("(" + best[0].config + ")") != std::string::npos);
  CHECK(topk.standard_output.find("(" + best[2].config + ")") != std::string::npos);

  // Only paths named by flags are written.
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 7);

  const auto missing = cli({"analyze", "portability", "--caches", w + "," + a, "--subset", "W6600,MI250X"});
  CHECK(missing.exit_code == 1);
}

TEST_CASE("cli import equals the library import") {
  TempDir dir;
  write_file_atomically(dir / "ext.json", R"({"device_name": "W6600", "kernel_name": "convolution",
    "tune_params_keys": ["block_size_x", "block_size_y", "tile_size_x", "tile_size_y", "read_only", "use_padding", "use_shmem"],
    "cache": {"128,1,1,4,1,0,0": {"time": 0.9}, "16,1,1,1,0,0,0": {"time": "CompilationFailed"}}})");
  const auto r = cli({"import", "--from", "external", "--in", (dir / "ext.json").string(), "--space",
                      kSpaces + "/convolution.spec", "--out", (dir / "n.json").string()});
  REQUIRE(r.exit_code == 0);
  ImportOptions opts;
  opts.expected_space = load_space_spec(kSpaces + "/convolution.spec");
  CHECK(read_file(dir / "n.json") == serialize_cache(import_external_cache_file(dir / "ext.json", opts)));
  CHECK(cli({"import", "--from", "other", "--in", (dir / "ext.json").string(), "--out", (dir / "x.json").string()})
            .exit_code == 2);
}

TEST_CASE("cli tune with a command backend") {
  TempDir dir;
  write_file_atomically(dir / "s.spec", "kernel = \"k\"\n[params]\nbx = [1, 2, 3]\n");
  const auto r = cli({"tune", "--space", (dir / "s.spec").string(), "--backend",
                      std::string("cmd:") + TUNESCAPE_FIXTURES_DIR "/fake_bench.sh ok {bx}", "--runs", "2",
                      "--out", (dir / "o.json").string()});
  REQUIRE(r.exit_code == 0);
  const auto cache = read_cache(dir / "o.json");
  CHECK(cache.ok_count() == 3);
  CHECK(*cache.find("1")->time_ms == 1.0);
  CHECK(r.standard_output.find("best         1\n") != std::string::npos);
}
