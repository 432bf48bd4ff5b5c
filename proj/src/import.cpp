#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "detail/json_strict.hpp"
#include "tunescape/cache.hpp"
#include "tunescape/errors.hpp"

namespace tunescape {

using json = nlohmann::json;

std::vector<std::pair<std::string, Status>> ImportOptions::default_failure_markers() {
  return {
      {"CompilationFailed", Status::compile_failed},
      {"compilation failed", Status::compile_failed},
      {"RuntimeFailed", Status::runtime_failed},
      {"runtime failed", Status::runtime_failed},
      {"InvalidConfig", Status::invalid},
      {"invalid configuration", Status::invalid},
      {"timeout", Status::timeout},
  };
}

namespace {

// Older versions of the external tool recorded failures as this time value.
constexpr double kFailureSentinel = 1e20;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<Status> match_marker(std::string_view text, const ImportOptions& options) {
  const std::string haystack = lower(text);
  for (const auto& [marker, status] : options.failure_markers)
    if (haystack.find(lower(marker)) != std::string::npos) return status;
  return std::nullopt;
}

std::string trim_fields(std::string_view key) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = std::min(key.find(',', pos), key.size());
    std::string_view field = key.substr(pos, comma - pos);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
    out += field;
    if (comma == key.size()) return out;
    out += ',';
    pos = comma + 1;
  }
}

// The external tool appends entries while tuning and closes the document only at the end, so
// interrupted runs leave the outer objects open.
json parse_possibly_unterminated(std::string_view text, bool& repaired) {
  repaired = false;
  try {
    return detail::parse_strict(text);
  } catch (const CacheFormatError& original) {
    std::string_view body = text;
    while (!body.empty() && (std::isspace(static_cast<unsigned char>(body.back())) || body.back() == ','))
      body.remove_suffix(1);
    for (const char* suffix : {"}}", "}"}) {
      try {
        json doc = detail::parse_strict(std::string(body) + suffix);
        repaired = true;
        return doc;
      } catch (const CacheFormatError&) {
      }
    }
    throw;
  }
}

}  // namespace

TuningCache import_external_cache(std::string_view text, const ImportOptions& options) {
  bool repaired = false;
  const json doc = parse_possibly_unterminated(text, repaired);
  if (!doc.is_object()) throw ImportError("external cache is not a JSON object");

  const auto keys_it = doc.find("tune_params_keys");
  if (keys_it == doc.end() || !keys_it->is_array() || keys_it->empty())
    throw ImportError("external cache has no 'tune_params_keys' list");
  std::vector<std::string> param_order;
  for (const auto& k : *keys_it) {
    if (!k.is_string()) throw ImportError("'tune_params_keys' must hold strings");
    param_order.push_back(k.get<std::string>());
  }

  const auto entries_it = doc.find("cache");
  if (entries_it == doc.end() || !entries_it->is_object())
    throw ImportError("external cache has no 'cache' object");

  TuningCache cache;
  cache.provenance = Provenance::imported;
  cache.param_order = param_order;
  cache.kernel_name = doc.value("kernel_name", std::string("unknown"));
  cache.device_name = options.device_name ? *options.device_name
                                          : doc.value("device_name", std::string("unknown"));
  cache.metadata["source_format"] = "external";
  cache.metadata["time_unit"] = options.time_scale == 1.0 ? "ms" : fmt::format("ms*{}", options.time_scale);
  if (options.metric_field) cache.metadata["metric_field"] = *options.metric_field;
  if (const auto it = doc.find("objective"); it != doc.end() && it->is_string())
    cache.metadata["objective"] = it->get<std::string>();
  if (repaired) cache.metadata["repaired_unterminated_document"] = "true";

  const SearchSpaceSpec* space = options.expected_space ? &*options.expected_space : nullptr;
  if (space) {
    if (param_order != space->parameter_names())
      throw ImportError(fmt::format("external parameters [{}] do not match space '{}' [{}]",
                                    fmt::join(param_order, ","), space->kernel_name(),
                                    fmt::join(space->parameter_names(), ",")));
    cache.space_fingerprint = space->fingerprint();
    cache.kernel_name = space->kernel_name();
    if (space->metric()) cache.metadata["metric"] = space->metric()->source();
  }

  for (const auto& [raw_key, entry] : entries_it->items()) {
    const std::size_t arity = static_cast<std::size_t>(std::count(raw_key.begin(), raw_key.end(), ',')) + 1;
    if (arity != param_order.size())
      throw ImportError(fmt::format("entry '{}' has {} fields, expected {}", raw_key, arity,
                                    param_order.size()));
    std::string key = trim_fields(raw_key);
    std::optional<Configuration> config;
    if (space) {
      config = space->parse_key(key);
      if (!config || !space->is_valid(*config))
        throw ImportError(fmt::format("entry '{}' lies outside space '{}'", raw_key,
                                      space->kernel_name()));
      key = space->key(*config);
    }
    if (!entry.is_object()) throw ImportError(fmt::format("entry '{}' is not an object", raw_key));

    const auto time_it = entry.find(options.time_field);
    if (time_it == entry.end())
      throw ImportError(fmt::format("entry '{}' has no '{}' field", raw_key, options.time_field));

    if (time_it->is_string()) {
      const std::string marker = time_it->get<std::string>();
      const auto status = match_marker(marker, options);
      if (!status)
        throw ImportError(fmt::format("entry '{}' has unrecognised time marker '{}'", raw_key, marker));
      cache.insert(Observation::failure(key, *status, marker));
      continue;
    }
    if (!time_it->is_number())
      throw ImportError(fmt::format("entry '{}' has a non-numeric '{}'", raw_key, options.time_field));

    const double raw_time = time_it->get<double>();
    if (!std::isfinite(raw_time) || raw_time <= 0 || raw_time >= kFailureSentinel) {
      cache.insert(Observation::failure(key, Status::runtime_failed,
                                        fmt::format("recorded time {}", raw_time)));
      continue;
    }
    const double time = raw_time * options.time_scale;

    std::vector<double> times;
    if (const auto it = entry.find(options.times_field); it != entry.end() && it->is_array()) {
      for (const auto& t : *it) {
        if (!t.is_number()) {
          times.clear();
          break;
        }
        const double v = t.get<double>() * options.time_scale;
        if (!std::isfinite(v) || v <= 0) {
          times.clear();
          break;
        }
        times.push_back(v);
      }
    }
    if (times.empty()) times.push_back(time);

    std::optional<double> metric;
    if (options.metric_field) {
      const auto it = entry.find(*options.metric_field);
      if (it != entry.end() && it->is_number() && std::isfinite(it->get<double>()))
        metric = it->get<double>();
    }
    if (!metric && space && space->metric()) metric = space->compute_metric(time, *config);
    cache.insert(Observation::success(key, std::move(times), time, metric));
  }
  cache.validate();
  return cache;
}

TuningCache import_external_cache_file(const std::filesystem::path& path,
                                       const ImportOptions& options) {
  const std::string text = read_file(path);
  try {
    return import_external_cache(text, options);
  } catch (const ImportError& e) {
    throw ImportError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace tunescape
