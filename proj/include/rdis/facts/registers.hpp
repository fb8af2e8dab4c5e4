#pragma once

#include <string_view>

namespace rdis::facts {

// Register names are uppercase Intel names. RIP and the pseudo names NONE
// and Unknown are not general-purpose registers.
inline constexpr std::string_view kNoRegister = "NONE";
inline constexpr std::string_view kUnknownRegister = "Unknown";

// Name of the general-purpose register for encoding `number` (0-15) at
// `width` bytes. `rex` selects SPL/BPL/SIL/DIL over AH/CH/DH/BH for 1-byte
// numbers 4-7.
std::string_view gpr_name(int number, int width, bool rex);

// 64-bit register containing `name`, or empty if `name` is not a GPR.
std::string_view full_register(std::string_view name);

// Width in bytes of a GPR, segment, RIP or XMM register; 0 if unknown.
int register_width(std::string_view name);

bool is_gpr(std::string_view name);

// All 64-bit GPR names in encoding order.
const std::string_view* gpr64_names();

}  // namespace rdis::facts
