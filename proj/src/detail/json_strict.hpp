#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "tunescape/errors.hpp"

namespace tunescape::detail {

// Parses JSON while rejecting duplicate object keys anywhere in the document.
inline nlohmann::json parse_strict(std::string_view text) {
  std::vector<std::set<std::string>> open_keys;
  std::string duplicate;
  nlohmann::json::parser_callback_t cb = [&](int depth, nlohmann::json::parse_event_t event, nlohmann::json& parsed) {
    switch (event) {
      case nlohmann::json::parse_event_t::object_start:
        open_keys.emplace_back();
        break;
      case nlohmann::json::parse_event_t::object_end:
        if (!open_keys.empty()) open_keys.pop_back();
        break;
      case nlohmann::json::parse_event_t::key:
        if (!open_keys.empty() && !open_keys.back().insert(parsed.get<std::string>()).second &&
            duplicate.empty())
          duplicate = parsed.get<std::string>();
        break;
      default: break;
    }
    (void)depth;
    return true;
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end(), cb);
  } catch (const nlohmann::json::parse_error& e) {
    throw CacheFormatError(fmt::format("JSON parse error: {}", e.what()), e.byte);
  }
  if (!duplicate.empty()) throw CacheFormatError(fmt::format("duplicate key '{}'", duplicate));
  return doc;
}

}  // namespace tunescape::detail
