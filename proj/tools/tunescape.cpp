// tunescape: tune kernels against a search space and analyze the recorded landscapes.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tunescape/cache.hpp"
#include "tunescape/errors.hpp"
#include "tunescape/landscape.hpp"
#include "tunescape/measure.hpp"
#include "tunescape/space.hpp"
#include "tunescape/strategies.hpp"

namespace ts = tunescape;

namespace {

std::string fmt_num(double v) { return fmt::format("{:.6g}", v); }

struct TuneArgs {
  std::string space;
  std::string backend;
  std::string strategy = "brute";
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string device = "unknown";
  std::string scheme;
  std::string compile;
  bool self_repeating = false;
  bool first_improvement = false;
  int warmup = 1;
  int runs = 7;
  std::string aggregate = "mean";
  long timeout_ms = 60'000;
};

int run_tune(const TuneArgs& a) {
  const ts::SearchSpaceSpec space = ts::load_space_spec(a.space);
  ts::MeasurementProtocol protocol;
  protocol.warmup_runs = a.warmup;
  protocol.benchmark_runs = a.runs;
  protocol.aggregate = ts::parse_aggregate(a.aggregate);
  protocol.timeout = std::chrono::milliseconds(a.timeout_ms);
  protocol.validate();

  ts::BackendDescriptor descriptor;
  if (a.backend.starts_with("sim:")) {
    descriptor.kind = ts::BackendKind::simulated;
    descriptor.source_cache = a.backend.substr(4);
  } else if (a.backend.starts_with("cmd:")) {
    descriptor.kind = ts::BackendKind::command;
    descriptor.command_template = a.backend.substr(4);
    descriptor.compile_template = a.compile;
    descriptor.self_repeating = a.self_repeating;
  } else {
    throw CLI::ValidationError("--backend", "expected sim:CACHE or cmd:TEMPLATE");
  }
  const auto backend = ts::make_backend(descriptor, space);

  ts::StrategyResult result;
  ts::TuningCache cache;
  if (a.strategy == "brute") {
    std::tie(result, cache) = ts::brute_force(space, *backend, protocol, a.device);
  } else if (a.strategy == "random") {
    result = ts::random_search(space, *backend, protocol, ts::Budget{a.budget}, a.seed);
    cache = ts::trace_to_cache(space, result, a.device);
  } else {
    ts::LocalSearchOptions opts;
    opts.scheme = a.scheme.empty() ? space.neighbor_scheme() : ts::parse_neighbor_scheme(a.scheme);
    opts.first_improvement = a.first_improvement;
    result = ts::greedy_local_search(space, *backend, protocol, ts::Budget{a.budget}, a.seed, opts);
    cache = ts::trace_to_cache(space, result, a.device);
  }
  ts::write_cache(cache, a.out);

  std::cout << fmt::format("evaluations  {}{}\n", result.evaluations_used,
                           result.budget_clamped ? " (budget clamped to space size)" : "");
  std::cout << fmt::format("ok           {}\n", cache.ok_count());
  if (result.best) {
    std::cout << fmt::format("best         {}\n", space.key(*result.best));
    std::cout << fmt::format("time_ms      {}\n", fmt_num(*result.best_observation->time_ms));
    std::cout << fmt::format("performance  {}\n", fmt_num(result.best_observation->performance()));
  } else {
    std::cout << "best         none\n";
  }
  return 0;
}

int run_stats(const std::string& cache_path) {
  const ts::TuningCache cache = ts::read_cache(cache_path);
  const ts::PerfStats s = ts::perf_stats(cache);
  std::cout << fmt::format("kernel   {}\n", cache.kernel_name);
  std::cout << fmt::format("device   {}\n", cache.device_name);
  std::cout << fmt::format("records  {} ok, {} failed\n", s.n_ok, s.n_failed);
  std::cout << fmt::format("median   {}\n", fmt_num(s.median_perf));
  std::cout << fmt::format("maximum  {}\n", fmt_num(s.max_perf));
  std::cout << fmt::format("impact   {:.1f}x\n", s.impact);
  return 0;
}

int run_centrality(const std::string& cache_path, const std::string& space_path,
                   const std::string& scheme, double p_max, double step, double damping,
                   const std::string& out) {
  const ts::SearchSpaceSpec space = ts::load_space_spec(space_path);
  const ts::TuningCache cache = ts::read_cache(cache_path);
  const auto s = scheme.empty() ? space.neighbor_scheme() : ts::parse_neighbor_scheme(scheme);
  const ts::FitnessFlowGraph ffg = ts::build_ffg(cache, space, s);
  ts::PageRankOptions opts;
  opts.damping = damping;
  const ts::CentralityCurve curve = ts::centrality_curve(ffg, opts, ts::default_p_grid(p_max, step));
  if (!out.empty()) ts::write_file_atomically(out, ts::centrality_csv(curve));

  std::cout << fmt::format("nodes {}  edges {}  minima {}  scheme {}  failed omitted {}\n", ffg.size(),
                           ffg.graph().edge_count(), curve.minima_count, ts::to_string(s),
                           cache.records.size() - ffg.size());
  std::cout << "p       C_p\n";
  for (std::size_t i = 0; i < curve.p_grid.size(); ++i)
    std::cout << fmt::format("{:<7.3f} {:.6f}\n", curve.p_grid[i], curve.c_p_values[i]);
  return 0;
}

int run_portability(const std::vector<std::string>& cache_paths,
                    const std::vector<std::string>& subset_arg, const std::string& config,
                    const std::string& out) {
  ts::CacheSet caches;
  std::vector<std::string> order;
  for (const auto& path : cache_paths) {
    ts::TuningCache cache = ts::read_cache(path);
    const std::string device = cache.device_name;
    if (!caches.emplace(device, std::move(cache)).second)
      throw std::invalid_argument("two caches name device '" + device + "'");
    order.push_back(device);
  }
  const std::vector<std::string> subset = subset_arg.empty() ? order : subset_arg;

  std::optional<ts::PortabilityReport> report;
  if (config.empty())
    report = ts::best_portable_config(caches, subset);
  else
    report = ts::perf_portability(caches, subset, config);
  if (!report) throw ts::NoFeasibleData("no configuration has nonzero efficiency on every device");
  if (!out.empty()) ts::write_file_atomically(out, ts::portability_json(*report));

  std::cout << fmt::format("config  {}\n", report->config);
  for (std::size_t i = 0; i < report->devices.size(); ++i)
    std::cout << fmt::format("  {:<20} {:.4f}\n", report->devices[i], report->efficiencies[i]);
  std::cout << fmt::format("PP      {:.4f}\n", report->pp);
  return 0;
}

int run_topk(const std::string& cache_path, std::size_t k) {
  const ts::TuningCache cache = ts::read_cache(cache_path);
  const auto rows = ts::top_k(cache, k);
  std::cout << fmt::format("rank  {:<12} ({})\n", "performance", fmt::join(cache.param_order, ","));
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::cout << fmt::format("{:<5} {:<12} ({})\n", i + 1, fmt_num(rows[i].metric_value), rows[i].config);
  return 0;
}

int run_export_dist(const std::string& cache_path, const std::string& out,
                    const std::string& quantiles_out) {
  const ts::TuningCache cache = ts::read_cache(cache_path);
  const ts::DistributionDataset data = ts::export_distribution(cache);
  ts::write_file_atomically(out, ts::distribution_csv(data));
  if (!quantiles_out.empty()) ts::write_file_atomically(quantiles_out, ts::quantiles_csv(data));
  std::cout << fmt::format("rows {}\n", data.rows.size());
  for (std::size_t i = 0; i < data.quantiles.size(); ++i)
    std::cout << fmt::format("q{:<5} {:.4f}\n", ts::DistributionDataset::kQuantiles[i], data.quantiles[i]);
  return 0;
}

int run_export_ffg(const std::string& cache_path, const std::string& space_path,
                   const std::string& scheme, const std::string& out) {
  const ts::SearchSpaceSpec space = ts::load_space_spec(space_path);
  const ts::TuningCache cache = ts::read_cache(cache_path);
  const auto s = scheme.empty() ? space.neighbor_scheme() : ts::parse_neighbor_scheme(scheme);
  const ts::FitnessFlowGraph ffg = ts::build_ffg(cache, space, s);
  ts::write_file_atomically(out, ts::export_dot(ffg));
  std::cout << fmt::format("nodes {}  edges {}  minima {}\n", ffg.size(), ffg.graph().edge_count(),
                           ffg.graph().sinks().size());
  return 0;
}

struct ImportArgs {
  std::string from;
  std::string in;
  std::string space;
  std::string out;
  std::string device;
  std::string metric_field;
  double time_scale = 1.0;
};

int run_import(const ImportArgs& a) {
  ts::ImportOptions opts;
  if (!a.space.empty()) opts.expected_space = ts::load_space_spec(a.space);
  if (!a.device.empty()) opts.device_name = a.device;
  if (!a.metric_field.empty()) opts.metric_field = a.metric_field;
  opts.time_scale = a.time_scale;
  const ts::TuningCache cache = ts::import_external_cache_file(a.in, opts);
  ts::write_cache(cache, a.out);
  std::cout << fmt::format("imported {} records ({} ok) for {} on {}\n", cache.records.size(),
                           cache.ok_count(), cache.kernel_name, cache.device_name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auto-tuning search spaces, measurement and landscape analysis"};
  app.require_subcommand(1);

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Measure configurations of a search space");
  tune_cmd->add_option("--space", tune.space, "Search space file")->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--backend", tune.backend, "sim:CACHE or cmd:TEMPLATE")->required();
  tune_cmd->add_option("--strategy", tune.strategy)->check(CLI::IsMember({"brute", "random", "local"}));
  tune_cmd->add_option("--budget", tune.budget, "Maximum measurements (random, local)");
  tune_cmd->add_option("--seed", tune.seed);
  tune_cmd->add_option("--out", tune.out, "Output cache")->required();
  tune_cmd->add_option("--device", tune.device, "Device name recorded in the cache");
  tune_cmd->add_option("--scheme", tune.scheme, "Neighbourhood for local search")
      ->check(CLI::IsMember({"hamming1", "adjacent"}));
  tune_cmd->add_flag("--first-improvement", tune.first_improvement);
  tune_cmd->add_option("--compile", tune.compile, "Compile command template (cmd backend)");
  tune_cmd->add_flag("--self-repeating", tune.self_repeating,
                     "The command runs warmups and repeats itself");
  tune_cmd->add_option("--warmup", tune.warmup);
  tune_cmd->add_option("--runs", tune.runs);
  tune_cmd->add_option("--aggregate", tune.aggregate)->check(CLI::IsMember({"mean", "median", "min"}));
  tune_cmd->add_option("--timeout-ms", tune.timeout_ms);

  auto* analyze = app.add_subcommand("analyze", "Analyze recorded caches");
  analyze->require_subcommand(1);

  std::string stats_cache;
  auto* stats_cmd = analyze->add_subcommand("stats", "Median, maximum and tuning impact");
  stats_cmd->add_option("--cache", stats_cache)->required()->check(CLI::ExistingFile);

  std::string cen_cache, cen_space, cen_scheme, cen_out;
  double p_max = 0.15, p_step = 0.005, damping = 0.85;
  auto* cen_cmd = analyze->add_subcommand("centrality", "Proportion of centrality curve");
  cen_cmd->add_option("--cache", cen_cache)->required()->check(CLI::ExistingFile);
  cen_cmd->add_option("--space", cen_space)->required()->check(CLI::ExistingFile);
  cen_cmd->add_option("--scheme", cen_scheme)->check(CLI::IsMember({"hamming1", "adjacent"}));
  cen_cmd->add_option("--p-max", p_max);
  cen_cmd->add_option("--p-step", p_step);
  cen_cmd->add_option("--damping", damping);
  cen_cmd->add_option("--out", cen_out, "CSV output");

  std::vector<std::string> port_caches, port_subset;
  std::string port_config, port_out;
  auto* port_cmd = analyze->add_subcommand("portability", "Performance portability across devices");
  port_cmd->add_option("--caches", port_caches)->required()->delimiter(',')->check(CLI::ExistingFile);
  port_cmd->add_option("--subset", port_subset, "Device names; default all")->delimiter(',');
  port_cmd->add_option("--config", port_config, "Evaluate this key instead of searching");
  port_cmd->add_option("--out", port_out, "JSON output");

  std::string topk_cache;
  std::size_t k = 5;
  auto* topk_cmd = analyze->add_subcommand("topk", "Best configurations");
  topk_cmd->add_option("--cache", topk_cache)->required()->check(CLI::ExistingFile);
  topk_cmd->add_option("-k", k)->check(CLI::PositiveNumber);

  auto* export_cmd = app.add_subcommand("export", "Write plot data");
  export_cmd->require_subcommand(1);

  std::string dist_cache, dist_out, dist_q_out;
  auto* dist_cmd = export_cmd->add_subcommand("dist", "Performance distribution CSV");
  dist_cmd->add_option("--cache", dist_cache)->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--out", dist_out)->required();
  dist_cmd->add_option("--quantiles-out", dist_q_out);

  std::string ffg_cache, ffg_space, ffg_scheme, ffg_out;
  auto* ffg_cmd = export_cmd->add_subcommand("ffg", "Fitness flow graph in DOT");
  ffg_cmd->add_option("--cache", ffg_cache)->required()->check(CLI::ExistingFile);
  ffg_cmd->add_option("--space", ffg_space)->required()->check(CLI::ExistingFile);
  ffg_cmd->add_option("--scheme", ffg_scheme)->check(CLI::IsMember({"hamming1", "adjacent"}));
  ffg_cmd->add_option("--out", ffg_out)->required();

  ImportArgs imp;
  auto* import_cmd = app.add_subcommand("import", "Convert an external tuner cache");
  import_cmd->add_option("--from", imp.from)->required()->check(CLI::IsMember({"external"}));
  import_cmd->add_option("--in", imp.in)->required()->check(CLI::ExistingFile);
  import_cmd->add_option("--space", imp.space)->check(CLI::ExistingFile);
  import_cmd->add_option("--out", imp.out)->required();
  import_cmd->add_option("--device", imp.device);
  import_cmd->add_option("--metric-field", imp.metric_field);
  import_cmd->add_option("--time-scale", imp.time_scale, "Multiplier to milliseconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*tune_cmd) return run_tune(tune);
    if (*stats_cmd) return run_stats(stats_cache);
    if (*cen_cmd) return run_centrality(cen_cache, cen_space, cen_scheme, p_max, p_step, damping, cen_out);
    if (*port_cmd) return run_portability(port_caches, port_subset, port_config, port_out);
    if (*topk_cmd) return run_topk(topk_cache, k);
    if (*dist_cmd) return run_export_dist(dist_cache, dist_out, dist_q_out);
    if (*ffg_cmd) return run_export_ffg(ffg_cache, ffg_space, ffg_scheme, ffg_out);
    if (*import_cmd) return run_import(imp);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
