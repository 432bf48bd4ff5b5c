#include "tunescape/space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tunescape/errors.hpp"

namespace tunescape {

std::string format_param_value(const ParamValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

const char* to_string(NeighborScheme scheme) {
  return scheme == NeighborScheme::hamming1 ? "hamming1" : "adjacent";
}

NeighborScheme parse_neighbor_scheme(std::string_view text) {
  if (text == "hamming1") return NeighborScheme::hamming1;
  if (text == "adjacent") return NeighborScheme::adjacent;
  throw SpecError(fmt::format("unknown neighbor scheme '{}' (expected hamming1 or adjacent)", text));
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

constexpr std::string_view kTimeSymbol = "time_ms";

}  // namespace

SearchSpaceSpec::SearchSpaceSpec(std::string kernel_name, std::vector<ParameterDef> parameters,
                                 std::vector<std::string> constraints,
                                 std::optional<std::string> metric, NeighborScheme scheme)
    : kernel_name_(std::move(kernel_name)), parameters_(std::move(parameters)), scheme_(scheme) {
  if (kernel_name_.empty()) throw SpecError("kernel name is empty");
  if (kernel_name_.find_first_of("\"\n") != std::string::npos)
    throw SpecError("kernel name must not contain quotes or newlines");
  if (parameters_.empty()) throw SpecError("a space needs at least one parameter");

  std::set<std::string> seen;
  std::vector<Symbol> symbols;
  for (const auto& p : parameters_) {
    if (!is_identifier(p.name)) throw SpecError(fmt::format("invalid parameter name '{}'", p.name));
    if (p.name == kTimeSymbol || p.name == "true" || p.name == "false")
      throw SpecError(fmt::format("parameter name '{}' is reserved", p.name));
    if (!seen.insert(p.name).second)
      throw SpecError(fmt::format("duplicate parameter name '{}'", p.name));
    if (p.values.empty()) throw SpecError(fmt::format("parameter '{}' has no values", p.name));
    if (p.values.size() > std::numeric_limits<std::uint32_t>::max())
      throw SpecError(fmt::format("parameter '{}' has too many values", p.name));
    const bool strings = p.is_string();
    std::set<ParamValue> distinct;
    for (const auto& v : p.values) {
      if (std::holds_alternative<std::string>(v) != strings)
        throw SpecError(fmt::format("parameter '{}' mixes string and integer values", p.name));
      if (const auto* s = std::get_if<std::string>(&v)) {
        if (s->empty() || s->find_first_of(",\"\n") != std::string::npos)
          throw SpecError(fmt::format(
              "string value '{}' of parameter '{}' must be non-empty without commas or quotes", *s,
              p.name));
      }
      if (!distinct.insert(v).second)
        throw SpecError(fmt::format("parameter '{}' lists value {} twice", p.name,
                                    format_param_value(v)));
    }
    symbols.push_back({p.name, strings ? ExprType::string : ExprType::integer});
  }

  constraints_by_level_.resize(parameters_.size());
  for (auto& source : constraints) {
    Expression expr = Expression::parse(source, symbols);
    if (expr.type() != ExprType::boolean)
      throw SpecError(fmt::format("constraint '{}' has type {}, expected boolean", source,
                                  to_string(expr.type())));
    const auto& refs = expr.referenced_symbols();
    const std::size_t level = refs.empty() ? 0 : refs.back();
    constraints_by_level_[level].push_back(constraints_.size());
    constraints_.push_back(std::move(expr));
  }

  if (metric) {
    symbols.push_back({std::string(kTimeSymbol), ExprType::real});
    Expression expr = Expression::parse(*metric, symbols);
    if (expr.type() != ExprType::integer && expr.type() != ExprType::real)
      throw SpecError(fmt::format("metric '{}' must be numeric", *metric));
    metric_ = std::move(expr);
  }
}

std::vector<std::string> SearchSpaceSpec::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(parameters_.size());
  for (const auto& p : parameters_) names.push_back(p.name);
  return names;
}

std::uint64_t SearchSpaceSpec::cartesian_size() const {
  std::uint64_t size = 1;
  for (const auto& p : parameters_) {
    if (__builtin_mul_overflow(size, static_cast<std::uint64_t>(p.values.size()), &size))
      throw SpecError("Cartesian size exceeds 64 bits");
  }
  return size;
}

bool SearchSpaceSpec::in_range(const Configuration& config) const {
  if (config.indices.size() != parameters_.size()) return false;
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    if (config.indices[i] >= parameters_[i].values.size()) return false;
  return true;
}

std::vector<EvalValue> SearchSpaceSpec::bind(const Configuration& config) const {
  std::vector<EvalValue> bindings;
  bindings.reserve(parameters_.size() + 1);
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    std::visit([&](const auto& v) { bindings.emplace_back(v); }, value(config, i));
  return bindings;
}

void SearchSpaceSpec::rethrow_eval(const EvaluationError& e, const Configuration& config) const {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    parts.push_back(fmt::format("{}={}", parameters_[i].name,
                                format_param_value(value(config, i))));
  throw EvaluationError(fmt::format("{} (configuration {})", e.what(), fmt::join(parts, ", ")));
}

bool SearchSpaceSpec::passes_level(std::size_t level, std::span<const EvalValue> bindings,
                                   const Configuration& config) const {
  for (const std::size_t c : constraints_by_level_[level]) {
    try {
      if (!constraints_[c].test(bindings)) return false;
    } catch (const EvaluationError& e) {
      rethrow_eval(e, config);
    }
  }
  return true;
}

bool SearchSpaceSpec::is_valid(const Configuration& config) const {
  if (!in_range(config)) return false;
  const auto bindings = bind(config);
  for (const auto& c : constraints_) {
    try {
      if (!c.test(bindings)) return false;
    } catch (const EvaluationError& e) {
      rethrow_eval(e, config);
    }
  }
  return true;
}

std::string SearchSpaceSpec::key(const Configuration& config) const {
  std::string out;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (i) out += ',';
    out += format_param_value(value(config, i));
  }
  return out;
}

std::optional<Configuration> SearchSpaceSpec::parse_key(std::string_view key) const {
  Configuration config;
  config.indices.reserve(parameters_.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const std::size_t comma = key.find(',', pos);
    const bool last = i + 1 == parameters_.size();
    if (last != (comma == std::string_view::npos)) return std::nullopt;
    std::string_view field = key.substr(pos, last ? std::string_view::npos : comma - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);

    ParamValue parsed;
    if (parameters_[i].is_string()) {
      parsed = std::string(field);
    } else {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
      parsed = v;
    }
    const auto& values = parameters_[i].values;
    const auto it = std::find(values.begin(), values.end(), parsed);
    if (it == values.end()) return std::nullopt;
    config.indices.push_back(static_cast<std::uint32_t>(it - values.begin()));
    pos = last ? key.size() : comma + 1;
  }
  return config;
}

std::uint64_t SearchSpaceSpec::rank(const Configuration& config) const {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    r = r * parameters_[i].values.size() + config.indices[i];
  return r;
}

Configuration SearchSpaceSpec::unrank(std::uint64_t r) const {
  Configuration config{std::vector<std::uint32_t>(parameters_.size(), 0)};
  for (std::size_t i = parameters_.size(); i-- > 0;) {
    const std::uint64_t radix = parameters_[i].values.size();
    config.indices[i] = static_cast<std::uint32_t>(r % radix);
    r /= radix;
  }
  return config;
}

std::vector<Configuration> SearchSpaceSpec::enumerate() const {
  std::vector<Configuration> out;
  for_each_config([&](const Configuration& c) { out.push_back(c); });
  return out;
}

std::vector<std::uint64_t> SearchSpaceSpec::enumerate_ranks() const {
  std::vector<std::uint64_t> out;
  for_each_config([&](const Configuration& c) { out.push_back(rank(c)); });
  return out;
}

std::uint64_t SearchSpaceSpec::count_valid() const {
  const auto first = static_cast<std::int64_t>(parameters_.front().values.size());
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : total)
  for (std::int64_t v = 0; v < first; ++v) {
    std::uint64_t local = 0;
    walk(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v + 1),
         [&](const Configuration&) { ++local; });
    total += local;
  }
  return total;
}

std::vector<Configuration> SearchSpaceSpec::neighbors(const Configuration& config,
                                                      NeighborScheme scheme) const {
  std::vector<Configuration> out;
  Configuration candidate = config;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const std::uint32_t own = config.indices[i];
    const auto count = static_cast<std::uint32_t>(parameters_[i].values.size());
    auto try_index = [&](std::uint32_t j) {
      candidate.indices[i] = j;
      if (is_valid(candidate)) out.push_back(candidate);
    };
    if (scheme == NeighborScheme::hamming1) {
      for (std::uint32_t j = 0; j < count; ++j)
        if (j != own) try_index(j);
    } else {
      if (own > 0) try_index(own - 1);
      if (own + 1 < count) try_index(own + 1);
    }
    candidate.indices[i] = own;
  }
  return out;
}

double SearchSpaceSpec::compute_metric(double time_ms, const Configuration& config) const {
  if (!(time_ms > 0)) throw EvaluationError(fmt::format("time_ms must be positive, got {}", time_ms));
  if (!metric_) return 1.0 / time_ms;
  auto bindings = bind(config);
  bindings.emplace_back(time_ms);
  try {
    return metric_->evaluate_number(bindings);
  } catch (const EvaluationError& e) {
    rethrow_eval(e, config);
  }
}

std::string SearchSpaceSpec::to_text() const {
  std::string out = fmt::format("kernel = \"{}\"\nneighbor_scheme = {}\n", kernel_name_,
                                to_string(scheme_));
  if (metric_) out += fmt::format("metric = {}\n", metric_->source());
  out += "\n[params]\n";
  for (const auto& p : parameters_) {
    std::vector<std::string> items;
    for (const auto& v : p.values)
      items.push_back(p.is_string() ? fmt::format("\"{}\"", std::get<std::string>(v))
                                    : format_param_value(v));
    out += fmt::format("{} = [{}]\n", p.name, fmt::join(items, ", "));
  }
  out += "\n[constraints]\n";
  for (const auto& c : constraints_) out += c.source() + "\n";
  return out;
}

std::string SearchSpaceSpec::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : to_text()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

// ---------------------------------------------------------------------------------------------
// Spec document parser

namespace {

class SpecReader {
 public:
  explicit SpecReader(std::string_view text) : text_(text) {}

  SearchSpaceSpec read() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t nl = text_.find('\n', pos);
      const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
      ++line_no_;
      handle_line(text_.substr(pos, end - pos));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }

    if (!kernel_) throw SyntaxError("missing 'kernel' field", 0, 0);
    if (params_.empty()) throw SyntaxError("missing [params] section or no parameters", 0, 0);

    std::vector<std::string> sources;
    for (const auto& c : constraints_) sources.push_back(c.text);
    try {
      return SearchSpaceSpec(*kernel_, params_, sources,
                             metric_ ? std::optional<std::string>(metric_->text) : std::nullopt,
                             scheme_);
    } catch (const SyntaxError& e) {
      // Map expression-relative columns back to the document.
      for (const auto& c : constraints_) {
        try {
          (void)Expression::parse(c.text, symbols());
        } catch (const SyntaxError& inner) {
          throw SyntaxError(inner.detail(), c.line, c.column + inner.column() - 1);
        } catch (const SpecError& inner) {
          throw SpecError(fmt::format("line {}: {}", c.line, inner.what()));
        }
      }
      if (metric_)
        throw SyntaxError(e.detail(), metric_->line, metric_->column + e.column() - 1);
      throw;
    } catch (const SpecError& e) {
      for (const auto& c : constraints_) {
        try {
          (void)Expression::parse(c.text, symbols());
        } catch (const SpecError& inner) {
          throw SpecError(fmt::format("line {}: {}", c.line, inner.what()));
        } catch (const SyntaxError&) {
        }
      }
      throw;
    }
  }

 private:
  struct Located {
    std::string text;
    std::size_t line;
    std::size_t column;
  };

  enum class Section { top, params, constraints };

  [[noreturn]] void fail(const std::string& message, std::size_t column) const {
    throw SyntaxError(message, line_no_, column);
  }

  std::vector<Symbol> symbols() const {
    std::vector<Symbol> out;
    for (const auto& p : params_)
      out.push_back({p.name, p.is_string() ? ExprType::string : ExprType::integer});
    return out;
  }

  static std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
  }

  static std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i;
  }

  static std::string_view trim_right(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  }

  void handle_line(std::string_view raw) {
    const std::string_view line = trim_right(strip_comment(raw));
    const std::size_t start = skip_space(line, 0);
    if (start == line.size()) return;

    if (line[start] == '[') {
      const std::size_t close = line.find(']', start);
      if (close == std::string_view::npos) fail("unterminated section header", start + 1);
      const std::string_view name = line.substr(start + 1, close - start - 1);
      if (skip_space(line, close + 1) != line.size()) fail("text after section header", close + 2);
      if (name == "params") {
        if (seen_params_) fail("duplicate [params] section", start + 1);
        seen_params_ = true;
        section_ = Section::params;
      } else if (name == "constraints") {
        if (seen_constraints_) fail("duplicate [constraints] section", start + 1);
        seen_constraints_ = true;
        section_ = Section::constraints;
      } else {
        fail(fmt::format("unknown section '[{}]'", name), start + 2);
      }
      return;
    }

    if (section_ == Section::constraints) {
      constraints_.push_back({std::string(line.substr(start)), line_no_, start + 1});
      return;
    }

    // key = value
    std::size_t i = start;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
      ++i;
    const std::string_view name = line.substr(start, i - start);
    if (name.empty() || !is_identifier(name)) fail("expected a name", start + 1);
    i = skip_space(line, i);
    if (i >= line.size() || line[i] != '=') fail("expected '='", i + 1);
    const std::size_t value_col = skip_space(line, i + 1);
    const std::string_view value = line.substr(std::min(value_col, line.size()));
    if (value.empty()) fail(fmt::format("missing value for '{}'", name), value_col + 1);

    if (section_ == Section::params) {
      parse_param(std::string(name), line, value_col);
      return;
    }

    if (name == "kernel") {
      if (kernel_) fail("duplicate 'kernel' field", start + 1);
      kernel_ = unquote(value, value_col);
    } else if (name == "metric") {
      if (metric_) fail("duplicate 'metric' field", start + 1);
      metric_ = Located{std::string(value), line_no_, value_col + 1};
    } else if (name == "neighbor_scheme") {
      const std::string scheme = unquote(value, value_col);
      try {
        scheme_ = parse_neighbor_scheme(scheme);
      } catch (const SpecError& e) {
        fail(e.what(), value_col + 1);
      }
    } else {
      fail(fmt::format("unknown field '{}'", name), start + 1);
    }
  }

  std::string unquote(std::string_view value, std::size_t col) const {
    if (value.front() != '"') return std::string(value);
    if (value.size() < 2 || value.back() != '"') fail("unterminated string", col + 1);
    return std::string(value.substr(1, value.size() - 2));
  }

  std::int64_t read_int(std::string_view line, std::size_t& i) const {
    const std::size_t begin = i;
    if (i < line.size() && line[i] == '-') ++i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + i, v);
    if (ec != std::errc{} || ptr != line.data() + i) fail("expected an integer", begin + 1);
    return v;
  }

  void parse_param(std::string name, std::string_view line, std::size_t i) {
    for (const auto& p : params_)
      if (p.name == name) throw SpecError(fmt::format("line {}: duplicate parameter name '{}'",
                                                      line_no_, name));
    if (line[i] != '[') fail("expected '[' to open the value list", i + 1);
    ++i;
    ParameterDef def{std::move(name), {}};
    for (;;) {
      i = skip_space(line, i);
      if (i >= line.size()) fail("unterminated value list", i + 1);
      if (line[i] == ']' && def.values.empty()) {
        ++i;
        break;
      }
      if (line[i] == '"') {
        const std::size_t close = line.find('"', i + 1);
        if (close == std::string_view::npos) fail("unterminated string", i + 1);
        def.values.emplace_back(std::string(line.substr(i + 1, close - i - 1)));
        i = close + 1;
      } else {
        const std::size_t item_col = i + 1;
        const std::int64_t lo = read_int(line, i);
        std::size_t j = skip_space(line, i);
        if (line.substr(j, 2) == "..") {
          j = skip_space(line, j + 2);
          const std::int64_t hi = read_int(line, j);
          std::int64_t step = 1;
          std::size_t k = skip_space(line, j);
          if (line.substr(k, 2) == "by" &&
              (k + 2 >= line.size() || std::isspace(static_cast<unsigned char>(line[k + 2])))) {
            k = skip_space(line, k + 2);
            step = read_int(line, k);
            j = k;
          }
          if (step <= 0) fail("range step must be positive", item_col);
          if (hi < lo) fail("range end is below its start", item_col);
          if ((hi - lo) / step >= 1'000'000) fail("range is too long", item_col);
          for (std::int64_t v = lo; v <= hi; v += step) def.values.emplace_back(v);
          i = j;
        } else {
          def.values.emplace_back(lo);
        }
      }
      i = skip_space(line, i);
      if (i < line.size() && line[i] == ',') {
        ++i;
        continue;
      }
      if (i < line.size() && line[i] == ']') {
        ++i;
        break;
      }
      fail("expected ',' or ']'", i + 1);
    }
    if (skip_space(line, i) != line.size()) fail("text after value list", i + 1);
    if (def.values.empty())
      throw SpecError(fmt::format("line {}: parameter '{}' has no values", line_no_, def.name));
    params_.push_back(std::move(def));
  }

  std::string_view text_;
  std::size_t line_no_ = 0;
  Section section_ = Section::top;
  bool seen_params_ = false;
  bool seen_constraints_ = false;
  std::optional<std::string> kernel_;
  std::optional<Located> metric_;
  NeighborScheme scheme_ = NeighborScheme::hamming1;
  std::vector<ParameterDef> params_;
  std::vector<Located> constraints_;
};

}  // namespace

SearchSpaceSpec parse_space_spec(std::string_view text) { return SpecReader(text).read(); }

SearchSpaceSpec load_space_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open space spec '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_space_spec(buffer.str());
  } catch (const SyntaxError& e) {
    throw SyntaxError(fmt::format("{}: {}", path.string(), e.detail()), e.line(), e.column());
  }
}

}  // namespace tunescape
