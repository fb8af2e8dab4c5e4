#include "rdis/facts/registers.hpp"

#include <array>

namespace rdis::facts {
namespace {

constexpr std::array<std::string_view, 16> kGpr64 = {"RAX", "RCX", "RDX", "RBX", "RSP", "RBP", "RSI", "RDI",
                                                     "R8",  "R9",  "R10", "R11", "R12", "R13", "R14", "R15"};
constexpr std::array<std::string_view, 16> kGpr32 = {"EAX", "ECX", "EDX",  "EBX",  "ESP",  "EBP",  "ESI",  "EDI",
                                                     "R8D", "R9D", "R10D", "R11D", "R12D", "R13D", "R14D", "R15D"};
constexpr std::array<std::string_view, 16> kGpr16 = {"AX",  "CX",  "DX",   "BX",   "SP",   "BP",   "SI",   "DI",
                                                     "R8W", "R9W", "R10W", "R11W", "R12W", "R13W", "R14W", "R15W"};
constexpr std::array<std::string_view, 16> kGpr8 = {"AL",  "CL",  "DL",   "BL",   "SPL",  "BPL",  "SIL",  "DIL",
                                                    "R8B", "R9B", "R10B", "R11B", "R12B", "R13B", "R14B", "R15B"};
constexpr std::array<std::string_view, 4> kHigh8 = {"AH", "CH", "DH", "BH"};

}  // namespace

std::string_view gpr_name(int number, int width, bool rex) {
  if (number < 0 || number > 15) return {};
  switch (width) {
    case 8: return kGpr64[static_cast<std::size_t>(number)];
    case 4: return kGpr32[static_cast<std::size_t>(number)];
    case 2: return kGpr16[static_cast<std::size_t>(number)];
    case 1:
      if (!rex && number >= 4 && number < 8) return kHigh8[static_cast<std::size_t>(number - 4)];
      return kGpr8[static_cast<std::size_t>(number)];
    default: return {};
  }
}

std::string_view full_register(std::string_view name) {
  for (std::size_t i = 0; i < 16; ++i)
    if (name == kGpr64[i] || name == kGpr32[i] || name == kGpr16[i] || name == kGpr8[i]) return kGpr64[i];
  for (std::size_t i = 0; i < 4; ++i)
    if (name == kHigh8[i]) return kGpr64[i];
  return {};
}

int register_width(std::string_view name) {
  for (std::size_t i = 0; i < 16; ++i) {
    if (name == kGpr64[i]) return 8;
    if (name == kGpr32[i]) return 4;
    if (name == kGpr16[i]) return 2;
    if (name == kGpr8[i]) return 1;
  }
  for (std::string_view h : kHigh8)
    if (name == h) return 1;
  if (name == "RIP") return 8;
  if (name.size() >= 4 && name.substr(0, 3) == "XMM") return 16;
  if (name == "CS" || name == "DS" || name == "ES" || name == "SS" || name == "FS" || name == "GS") return 2;
  return 0;
}

bool is_gpr(std::string_view name) { return !full_register(name).empty(); }

const std::string_view* gpr64_names() { return kGpr64.data(); }

}  // namespace rdis::facts
