#include "tunescape/errors.hpp"

#include <fmt/format.h>

namespace tunescape {

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : Error(line == 0 ? fmt::format("syntax error at column {}: {}", column, message)
                      : fmt::format("syntax error at line {}, column {}: {}", line, column, message)),
      line_(line),
      column_(column),
      detail_(message) {}

CacheFormatError::CacheFormatError(const std::string& message, std::size_t byte_offset)
    : Error(fmt::format("{} (at byte {})", message, byte_offset)), byte_offset_(byte_offset) {}

NoFeasibleData::NoFeasibleData(const std::string& what)
    : DomainError(fmt::format("NoFeasibleData: {}", what)) {}

IncompleteCache::IncompleteCache(std::size_t missing)
    : DomainError(fmt::format("IncompleteCache: {} valid configuration(s) have no record", missing)),
      missing_(missing) {}

MissingEntry::MissingEntry(const std::string& key)
    : DomainError(fmt::format("MissingEntry: no record for configuration '{}'", key)), key_(key) {}

UnknownDevice::UnknownDevice(const std::string& device)
    : DomainError(fmt::format("UnknownDevice: no cache for device '{}'", device)) {}

NotConverged::NotConverged(std::size_t iterations, double residual)
    : DomainError(fmt::format("NotConverged: PageRank residual {:g} after {} iterations", residual,
                              iterations)),
      residual_(residual) {}

}  // namespace tunescape
