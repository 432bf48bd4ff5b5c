#include "tunescape/cache.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

#include "detail/json_strict.hpp"
#include "tunescape/errors.hpp"

namespace tunescape {

using json = nlohmann::json;

namespace {

std::size_t key_arity(std::string_view key) {
  return static_cast<std::size_t>(std::count(key.begin(), key.end(), ',')) + 1;
}

bool parse_int_field(std::string_view field, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc{} && ptr == field.data() + field.size() && !field.empty();
}

}  // namespace

bool ConfigKeyLess::operator()(std::string_view a, std::string_view b) const {
  std::size_t pa = 0;
  std::size_t pb = 0;
  for (;;) {
    const std::size_t ea = std::min(a.find(',', pa), a.size());
    const std::size_t eb = std::min(b.find(',', pb), b.size());
    const std::string_view fa = a.substr(pa, ea - pa);
    const std::string_view fb = b.substr(pb, eb - pb);
    std::int64_t ia = 0;
    std::int64_t ib = 0;
    if (parse_int_field(fa, ia) && parse_int_field(fb, ib)) {
      if (ia != ib) return ia < ib;
    } else if (fa != fb) {
      return fa < fb;
    }
    const bool enda = ea == a.size();
    const bool endb = eb == b.size();
    if (enda || endb) return enda && !endb;
    pa = ea + 1;
    pb = eb + 1;
  }
}

const char* to_string(Provenance provenance) {
  return provenance == Provenance::native ? "native" : "imported";
}

TuningCache TuningCache::for_space(const SearchSpaceSpec& space, std::string device_name) {
  TuningCache cache;
  cache.kernel_name = space.kernel_name();
  cache.device_name = std::move(device_name);
  cache.space_fingerprint = space.fingerprint();
  cache.param_order = space.parameter_names();
  return cache;
}

const Observation* TuningCache::find(std::string_view key) const {
  const auto it = records.find(std::string(key));
  return it == records.end() ? nullptr : &it->second;
}

void TuningCache::insert(Observation observation) {
  std::string key = observation.config;
  records.insert_or_assign(std::move(key), std::move(observation));
}

std::size_t TuningCache::ok_count() const {
  std::size_t n = 0;
  for (const auto& [key, obs] : records) n += obs.ok();
  return n;
}

void TuningCache::validate() const {
  if (param_order.empty()) throw CacheFormatError("cache has an empty param_order");
  std::set<std::string> names(param_order.begin(), param_order.end());
  if (names.size() != param_order.size()) throw CacheFormatError("param_order has duplicate names");

  auto finite_positive = [](double v) { return std::isfinite(v) && v > 0; };
  for (const auto& [key, obs] : records) {
    if (key_arity(key) != param_order.size())
      throw CacheFormatError(fmt::format("record '{}' has {} fields, param_order has {}", key,
                                         key_arity(key), param_order.size()));
    if (obs.config != key)
      throw CacheFormatError(fmt::format("record '{}' carries config '{}'", key, obs.config));
    if (obs.ok()) {
      if (!obs.time_ms || !finite_positive(*obs.time_ms))
        throw CacheFormatError(fmt::format("record '{}' is ok without a positive finite time", key));
      if (obs.times_ms.empty())
        throw CacheFormatError(fmt::format("record '{}' is ok without per-run times", key));
      for (const double t : obs.times_ms)
        if (!finite_positive(t))
          throw CacheFormatError(fmt::format("record '{}' has a non-finite or non-positive run time", key));
      if (obs.metric_value && !std::isfinite(*obs.metric_value))
        throw CacheFormatError(fmt::format("record '{}' has a non-finite metric", key));
    } else if (obs.time_ms || obs.metric_value || !obs.times_ms.empty()) {
      throw CacheFormatError(fmt::format("failed record '{}' carries timing data", key));
    }
  }
}

void TuningCache::check_space(const SearchSpaceSpec& space) const {
  if (!space_fingerprint.empty() && space_fingerprint != space.fingerprint())
    throw SpaceMismatch(fmt::format(
        "SpaceMismatch: cache fingerprint {} does not match space '{}' ({})", space_fingerprint,
        space.kernel_name(), space.fingerprint()));
  if (param_order != space.parameter_names())
    throw SpaceMismatch(fmt::format("SpaceMismatch: cache parameters [{}] differ from space [{}]",
                                    fmt::join(param_order, ","),
                                    fmt::join(space.parameter_names(), ",")));
}

// ---------------------------------------------------------------------------------------------

std::string serialize_cache(const TuningCache& cache) {
  cache.validate();
  json records = json::object();
  for (const auto& [key, obs] : cache.records) {
    json r = {{"status", to_string(obs.status)}};
    if (obs.ok()) {
      r["times_ms"] = obs.times_ms;
      r["time_ms"] = *obs.time_ms;
      if (obs.metric_value) r["metric_value"] = *obs.metric_value;
    }
    if (!obs.diagnostic.empty()) r["diagnostic"] = obs.diagnostic;
    records[key] = std::move(r);
  }
  const json doc = {
      {"schema_version", kCacheSchemaVersion},
      {"kernel_name", cache.kernel_name},
      {"device_name", cache.device_name},
      {"space_fingerprint", cache.space_fingerprint},
      {"param_order", cache.param_order},
      {"provenance", to_string(cache.provenance)},
      {"metadata", cache.metadata},
      {"records", std::move(records)},
  };
  return doc.dump(1) + "\n";
}

namespace {

template <typename T>
T required(const json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw CacheFormatError(fmt::format("{}: missing field '{}'", where, field));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CacheFormatError(fmt::format("{}: field '{}' has the wrong type", where, field));
  }
}

}  // namespace

TuningCache parse_cache(std::string_view text) {
  const json doc = detail::parse_strict(text);
  if (!doc.is_object()) throw CacheFormatError("cache document is not a JSON object");
  const auto version_it = doc.find("schema_version");
  if (version_it == doc.end() || !version_it->is_number_integer())
    throw SchemaVersionError("cache has no integer schema_version");
  if (version_it->get<int>() != kCacheSchemaVersion)
    throw SchemaVersionError(fmt::format("unsupported cache schema_version {} (expected {})",
                                         version_it->get<int>(), kCacheSchemaVersion));

  TuningCache cache;
  cache.kernel_name = required<std::string>(doc, "kernel_name", "cache");
  cache.device_name = required<std::string>(doc, "device_name", "cache");
  cache.space_fingerprint = required<std::string>(doc, "space_fingerprint", "cache");
  cache.param_order = required<std::vector<std::string>>(doc, "param_order", "cache");
  const auto provenance = required<std::string>(doc, "provenance", "cache");
  if (provenance == "native") {
    cache.provenance = Provenance::native;
  } else if (provenance == "imported") {
    cache.provenance = Provenance::imported;
  } else {
    throw CacheFormatError(fmt::format("unknown provenance '{}'", provenance));
  }
  cache.metadata = required<std::map<std::string, std::string>>(doc, "metadata", "cache");

  const auto records_it = doc.find("records");
  if (records_it == doc.end() || !records_it->is_object())
    throw CacheFormatError("cache: missing object field 'records'");
  for (const auto& [key, r] : records_it->items()) {
    const std::string where = fmt::format("record '{}'", key);
    if (!r.is_object()) throw CacheFormatError(fmt::format("{} is not an object", where));
    Observation obs;
    obs.config = key;
    try {
      obs.status = parse_status(required<std::string>(r, "status", where));
    } catch (const std::invalid_argument& e) {
      throw CacheFormatError(fmt::format("{}: {}", where, e.what()));
    }
    if (r.contains("times_ms")) obs.times_ms = required<std::vector<double>>(r, "times_ms", where);
    if (r.contains("time_ms")) obs.time_ms = required<double>(r, "time_ms", where);
    if (r.contains("metric_value")) obs.metric_value = required<double>(r, "metric_value", where);
    if (r.contains("diagnostic")) obs.diagnostic = required<std::string>(r, "diagnostic", where);
    cache.records.emplace(key, std::move(obs));
  }
  cache.validate();
  return cache;
}

void write_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(fmt::format("cannot move cache into place at '{}'", path.string()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_cache(const TuningCache& cache, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_cache(cache));
}

TuningCache read_cache(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_cache(text);
  } catch (const SchemaVersionError& e) {
    throw SchemaVersionError(fmt::format("{}: {}", path.string(), e.what()), e.byte_offset());
  } catch (const CacheFormatError& e) {
    throw CacheFormatError(fmt::format("{}: {}", path.string(), e.what()), e.byte_offset());
  }
}

// ---------------------------------------------------------------------------------------------

std::string serialize_device_meta(const DeviceMeta& meta) {
  if (meta.device_name.empty()) throw Error("device_name must not be empty");
  const json doc = {{"device_name", meta.device_name},
                    {"vendor", meta.vendor},
                    {"properties", meta.properties}};
  return doc.dump(1) + "\n";
}

DeviceMeta parse_device_meta(std::string_view text) {
  const json doc = detail::parse_strict(text);
  DeviceMeta meta;
  meta.device_name = required<std::string>(doc, "device_name", "device meta");
  if (meta.device_name.empty()) throw CacheFormatError("device meta: empty device_name");
  meta.vendor = required<std::string>(doc, "vendor", "device meta");
  if (const auto it = doc.find("properties"); it != doc.end()) {
    for (const auto& [k, v] : it->items())
      meta.properties[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return meta;
}

DeviceMeta read_device_meta(const std::filesystem::path& path) {
  return parse_device_meta(read_file(path));
}

void write_device_meta(const DeviceMeta& meta, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_device_meta(meta));
}

}  // namespace tunescape
