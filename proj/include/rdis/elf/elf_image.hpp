#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rdis::elf {

using Address = std::uint64_t;

enum class ElfErrorKind { io, bad_magic, unsupported_class, unsupported_machine, truncated };
// NotElf, UnsupportedClass, UnsupportedMachine, MalformedHeader or IoError.
std::string_view error_kind_name(ElfErrorKind kind);

class ElfError : public std::runtime_error {
 public:
  ElfError(ElfErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ElfErrorKind kind() const { return kind_; }

 private:
  ElfErrorKind kind_;
};

struct ElfSection {
  std::string name;
  std::uint32_t type = 0;
  std::uint64_t flags = 0;
  Address addr = 0;
  std::uint64_t size = 0;
  std::uint64_t align = 0;
  std::uint32_t link = 0;
  std::uint32_t info = 0;
  std::vector<std::uint8_t> bytes;  // empty for SHT_NOBITS

  bool alloc() const;
  bool exec() const;
  bool write() const;
  bool nobits() const;
};

struct ElfSymbol {
  std::string name;
  Address value = 0;
  std::uint64_t size = 0;
  std::string type;  // FUNC, OBJECT, NOTYPE, SECTION, FILE, ...
  std::string bind;  // LOCAL, GLOBAL, WEAK
  std::uint16_t shndx = 0;
  bool dynamic = false;
};

struct ElfRelocation {
  Address offset = 0;
  std::uint32_t type = 0;
  std::string type_name;  // without the R_X86_64_ prefix
  std::string symbol;
  std::uint16_t symbol_shndx = 0;
  Address symbol_value = 0;
  std::string symbol_type;
  std::string symbol_bind;
  std::int64_t addend = 0;
  std::uint32_t target_section = 0;  // sh_info of the RELA section; 0 for dynamic
  bool dynamic = false;
};

struct ElfImage {
  Address entry = 0;
  std::uint16_t type = 0;
  std::vector<ElfSection> sections;  // index-aligned with the section header table
  std::vector<ElfSymbol> symbols;
  std::vector<ElfRelocation> relocations;
  std::vector<std::string> needed;

  const ElfSection* section_named(const std::string& name) const;
  const ElfSection* section_containing(Address a) const;  // alloc sections only
};

ElfImage load_elf(const std::filesystem::path& path);
ElfImage parse_elf(const std::vector<std::uint8_t>& file);

std::string relocation_type_name(std::uint32_t type);

}  // namespace rdis::elf
