#pragma once

#include <cstdint>
#include <string_view>

namespace ringsync {

/// One word-time. The ring advances one position per tick.
using Tick = std::int64_t;
using NodeId = std::int32_t;
using MessageId = std::int64_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr MessageId kNoMessage = -1;

enum class Protocol { sync, csma };

constexpr std::string_view to_string(Protocol p) noexcept {
  return p == Protocol::sync ? "sync" : "csma";
}

}  // namespace ringsync
