#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace ringsync::csv {

/// Shortest round-trip decimal form; locale-independent.
std::string format(double value);
std::string format(std::int64_t value);
inline std::string format(std::uint64_t value) {
  return format(static_cast<std::int64_t>(value));
}
inline std::string format(int value) {
  return format(static_cast<std::int64_t>(value));
}

/// Writes one comma-separated line terminated by '\n'.
void write_row(std::ostream& out, std::initializer_list<std::string_view> cells);

}  // namespace ringsync::csv
