#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdis/elf/decoder.hpp"
#include "rdis/elf/elf_image.hpp"
#include "rdis/facts/fact_base.hpp"

namespace rdis::elf {

struct DecodedAt {
  Address addr = 0;
  std::optional<Decoded> insn;  // nullopt: invalid
};

// Decodes every byte offset of every executable alloc section, in address
// order. The serial and parallel versions return identical vectors.
std::vector<DecodedAt> decode_all_serial(const ElfImage& image);
std::vector<DecodedAt> decode_all_parallel(const ElfImage& image, int jobs);

// (location, value) for every 8-byte little-endian window inside one
// initialized alloc section whose value falls inside some alloc section.
std::vector<std::pair<Address, Address>> scan_data_serial(const ElfImage& image);
std::vector<std::pair<Address, Address>> scan_data_parallel(const ElfImage& image, int jobs);

struct ExtractOptions {
  int jobs = 1;
  std::string source;
};

facts::FactBase extract_facts(const ElfImage& image, const ExtractOptions& options = {});

// Converts decoded instructions into instruction/operand facts, assigning
// operand ids by first occurrence of each distinct payload.
void add_instruction_facts(const std::vector<DecodedAt>& decoded, facts::FactBase& out);

inline constexpr const char* kDecoderSubset = "x86-64 integer+sse2 subset v1";

}  // namespace rdis::elf
