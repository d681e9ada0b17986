#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace entlink {

using ValueId = std::int32_t;

// Value id used for unobserved cells.
inline constexpr ValueId kMissing = -1;

// Error categories map onto CLI exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RuntimeAbort : std::runtime_error {
  explicit RuntimeAbort(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace entlink
