#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdis::elf {

enum class OperandKind : std::uint8_t { reg, imm, mem };

struct MemRef {
  std::string seg = "NONE";
  std::string base = "NONE";  // "RIP" for RIP-relative
  std::string index = "NONE";
  int scale = 1;
  std::int64_t disp = 0;  // absolute target when base is RIP
  int size = 0;
};

struct Operand {
  OperandKind kind = OperandKind::reg;
  std::string reg;
  std::int64_t imm = 0;
  MemRef mem;
  int size = 0;
};

struct Decoded {
  int length = 0;
  std::string prefix;  // rep, repe, repne, lock, bnd or empty
  std::string mnemonic;
  std::vector<Operand> operands;  // Intel order: destination first
  int disp_offset = -1;  // byte offset of the encoded displacement
  int disp_size = 0;
  int imm_offset = -1;   // byte offset of the encoded immediate or branch offset
  int imm_size = 0;
  bool relative_branch = false;
};

// Decodes one instruction of the supported subset at `addr`, or nullopt if
// the bytes are not a valid (or supported) encoding.
std::optional<Decoded> decode(std::span<const std::uint8_t> bytes, std::uint64_t addr);

}  // namespace rdis::elf
