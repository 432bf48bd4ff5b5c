#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tunescape/errors.hpp"
#include "tunescape/expression.hpp"

namespace tunescape {

// A tunable parameter value: integers (booleans are written as 0/1) or strings.
using ParamValue = std::variant<std::int64_t, std::string>;

std::string format_param_value(const ParamValue& value);

struct ParameterDef {
  std::string name;
  std::vector<ParamValue> values;

  bool is_string() const { return std::holds_alternative<std::string>(values.front()); }
  bool operator==(const ParameterDef&) const = default;
};

enum class NeighborScheme { hamming1, adjacent };

const char* to_string(NeighborScheme scheme);
NeighborScheme parse_neighbor_scheme(std::string_view text);

// A point of a space, stored as one value index per parameter in canonical parameter order.
// Ordering is lexicographic over indices, which is the canonical configuration order.
struct Configuration {
  std::vector<std::uint32_t> indices;

  auto operator<=>(const Configuration&) const = default;
};

class SearchSpaceSpec {
 public:
  // Validates names and value lists and compiles every expression. Throws SpecError / SyntaxError.
  SearchSpaceSpec(std::string kernel_name, std::vector<ParameterDef> parameters,
                  std::vector<std::string> constraints = {},
                  std::optional<std::string> metric = std::nullopt,
                  NeighborScheme scheme = NeighborScheme::hamming1);

  const std::string& kernel_name() const noexcept { return kernel_name_; }
  const std::vector<ParameterDef>& parameters() const noexcept { return parameters_; }
  std::size_t dimensions() const noexcept { return parameters_.size(); }
  const std::vector<Expression>& constraints() const noexcept { return constraints_; }
  const std::optional<Expression>& metric() const noexcept { return metric_; }
  NeighborScheme neighbor_scheme() const noexcept { return scheme_; }
  std::vector<std::string> parameter_names() const;

  // Product of the value-list lengths, computed without enumerating. Throws SpecError past 2^64-1.
  std::uint64_t cartesian_size() const;

  bool is_valid(const Configuration& config) const;
  // True when indices are in range; says nothing about constraints.
  bool in_range(const Configuration& config) const;

  const ParamValue& value(const Configuration& config, std::size_t parameter) const {
    return parameters_[parameter].values[config.indices[parameter]];
  }
  std::vector<EvalValue> bind(const Configuration& config) const;

  // Values joined by commas in parameter order.
  std::string key(const Configuration& config) const;
  // Inverse of key(); nullopt when arity or any value does not match the space.
  std::optional<Configuration> parse_key(std::string_view key) const;

  // Mixed-radix rank within the Cartesian product; rank order equals canonical order.
  std::uint64_t rank(const Configuration& config) const;
  Configuration unrank(std::uint64_t rank) const;

  // Visits valid configurations in canonical order. Constraints are tested as soon as every
  // parameter they reference is assigned, so invalid subtrees are skipped.
  template <typename Visitor>
  void for_each_config(Visitor&& visit) const {
    walk(0, static_cast<std::uint32_t>(parameters_.front().values.size()), visit);
  }

  std::vector<Configuration> enumerate() const;
  std::vector<std::uint64_t> enumerate_ranks() const;
  // Same count as enumerate().size(), split over the first parameter with OpenMP.
  std::uint64_t count_valid() const;

  // Valid configurations adjacent to `config`, in parameter order then value-list order.
  std::vector<Configuration> neighbors(const Configuration& config, NeighborScheme scheme) const;
  std::vector<Configuration> neighbors(const Configuration& config) const {
    return neighbors(config, scheme_);
  }

  // Evaluates the metric with `time_ms` bound; 1/time_ms when the space defines none.
  double compute_metric(double time_ms, const Configuration& config) const;

  // Canonical text form; parse_space_spec(to_text()) reproduces an equal spec.
  std::string to_text() const;
  // FNV-1a 64 of to_text(), as 16 hex digits.
  std::string fingerprint() const;

  bool operator==(const SearchSpaceSpec& other) const { return to_text() == other.to_text(); }

 private:
  // Visits valid configurations whose first index lies in [first_begin, first_end).
  template <typename Visitor>
  void walk(std::uint32_t first_begin, std::uint32_t first_end, Visitor&& visit) const;

  bool passes_level(std::size_t level, std::span<const EvalValue> bindings,
                    const Configuration& config) const;
  [[noreturn]] void rethrow_eval(const EvaluationError& e, const Configuration& config) const;

  std::string kernel_name_;
  std::vector<ParameterDef> parameters_;
  std::vector<Expression> constraints_;
  std::optional<Expression> metric_;
  NeighborScheme scheme_;
  // constraints_by_level_[d]: constraints whose deepest referenced parameter is d.
  // Constant constraints live at level 0.
  std::vector<std::vector<std::size_t>> constraints_by_level_;
};

SearchSpaceSpec parse_space_spec(std::string_view text);
SearchSpaceSpec load_space_spec(const std::filesystem::path& path);

template <typename Visitor>
void SearchSpaceSpec::walk(std::uint32_t first_begin, std::uint32_t first_end,
                           Visitor&& visit) const {
  if (first_begin >= first_end) return;
  const std::size_t n = parameters_.size();
  Configuration config{std::vector<std::uint32_t>(n, 0)};
  config.indices[0] = first_begin;
  std::vector<EvalValue> bindings(n);
  auto bind_slot = [&](std::size_t d) {
    std::visit([&](const auto& v) { bindings[d] = v; }, parameters_[d].values[config.indices[d]]);
  };

  std::size_t depth = 0;
  bind_slot(0);
  for (;;) {
    bool descend = passes_level(depth, bindings, config);
    if (descend && depth + 1 == n) {
      visit(static_cast<const Configuration&>(config));
      descend = false;
    }
    if (descend) {
      ++depth;
      config.indices[depth] = 0;
      bind_slot(depth);
      continue;
    }
    // Advance the odometer at `depth`, carrying upward.
    for (;;) {
      const std::size_t limit = depth == 0 ? first_end : parameters_[depth].values.size();
      if (++config.indices[depth] < limit) {
        bind_slot(depth);
        break;
      }
      if (depth == 0) return;
      --depth;
    }
  }
}

}  // namespace tunescape
