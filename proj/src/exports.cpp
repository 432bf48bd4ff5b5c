#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "tunescape/landscape.hpp"

namespace tunescape {

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string distribution_csv(const DistributionDataset& data) {
  std::string out = "config_key,metric_value,fraction_of_optimum\n";
  for (const auto& row : data.rows)
    out += fmt::format("{},{},{}\n", csv_quote(row.config), row.metric_value,
                       row.fraction_of_optimum);
  return out;
}

std::string quantiles_csv(const DistributionDataset& data) {
  std::string out = "quantile,fraction_of_optimum\n";
  for (std::size_t i = 0; i < data.quantiles.size(); ++i)
    out += fmt::format("{},{}\n", DistributionDataset::kQuantiles[i], data.quantiles[i]);
  return out;
}

std::string centrality_csv(const CentralityCurve& curve) {
  std::string out = "p,c_p\n";
  for (std::size_t i = 0; i < curve.p_grid.size(); ++i)
    out += fmt::format("{:.6g},{}\n", curve.p_grid[i], curve.c_p_values[i]);
  return out;
}

std::string portability_json(const PortabilityReport& report) {
  nlohmann::ordered_json j;
  j["devices"] = report.devices;
  j["config"] = report.config;
  j["efficiencies"] = report.efficiencies;
  j["pp"] = report.pp;
  return j.dump(2) + "\n";
}

std::string export_dot(const FitnessFlowGraph& ffg) {
  const std::size_t n = ffg.size();
  // Bucket by rank in time order: 0 holds the fastest tenth.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ffg.times()[a] < ffg.times()[b]; });
  std::vector<std::size_t> bucket(n);
  for (std::size_t r = 0; r < n; ++r) bucket[order[r]] = r * 10 / n;

  std::string out = "digraph ffg {\n";
  for (std::size_t i = 0; i < n; ++i)
    out += fmt::format("  n{} [label=\"{}\", bucket={}, time_ms={:.6g}];\n", i,
                       dot_escape(ffg.keys()[i]), bucket[i], ffg.times()[i]);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto v : ffg.graph().successors(static_cast<Digraph::Node>(u)))
      out += fmt::format("  n{} -> n{};\n", u, v);
  out += "}\n";
  return out;
}

}  // namespace tunescape
