#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rdis::relfix {

// Every column value is a 64-bit integer; text columns hold interned ids.
using Value = std::int64_t;

enum class ColumnKind : std::uint8_t { address, number, text };

// Process-wide interner. Ids are stable for the lifetime of the process.
Value intern(std::string_view text);
const std::string& text_of(Value id);

}  // namespace rdis::relfix
