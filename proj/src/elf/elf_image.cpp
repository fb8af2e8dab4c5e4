#include "rdis/elf/elf_image.hpp"

#include <elf.h>

#include <cstring>
#include <fstream>

namespace rdis::elf {
namespace {

template <typename T>
T read_at(const std::vector<std::uint8_t>& file, std::uint64_t off) {
  if (off > file.size() || file.size() - off < sizeof(T))
    throw ElfError(ElfErrorKind::truncated, "ELF structure at offset " + std::to_string(off) + " is truncated");
  T v;
  std::memcpy(&v, file.data() + off, sizeof(T));
  return v;
}

std::string read_string(const std::vector<std::uint8_t>& file, const Elf64_Shdr& strtab, std::uint32_t off) {
  std::uint64_t pos = strtab.sh_offset + off;
  if (off >= strtab.sh_size || pos >= file.size()) return {};
  std::uint64_t end = std::min<std::uint64_t>(strtab.sh_offset + strtab.sh_size, file.size());
  const char* p = reinterpret_cast<const char*>(file.data() + pos);
  return std::string(p, strnlen(p, end - pos));
}

const char* symbol_type(unsigned t) {
  switch (t) {
    case STT_NOTYPE: return "NOTYPE";
    case STT_OBJECT: return "OBJECT";
    case STT_FUNC: return "FUNC";
    case STT_SECTION: return "SECTION";
    case STT_FILE: return "FILE";
    case STT_TLS: return "TLS";
    case STT_GNU_IFUNC: return "IFUNC";
    default: return "OTHER";
  }
}

const char* symbol_bind(unsigned b) {
  switch (b) {
    case STB_LOCAL: return "LOCAL";
    case STB_GLOBAL: return "GLOBAL";
    case STB_WEAK: return "WEAK";
    default: return "OTHER";
  }
}

}  // namespace

bool ElfSection::alloc() const { return flags & SHF_ALLOC; }
bool ElfSection::exec() const { return flags & SHF_EXECINSTR; }
bool ElfSection::write() const { return flags & SHF_WRITE; }
bool ElfSection::nobits() const { return type == SHT_NOBITS; }

const ElfSection* ElfImage::section_named(const std::string& name) const {
  for (const ElfSection& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const ElfSection* ElfImage::section_containing(Address a) const {
  for (const ElfSection& s : sections)
    if (s.alloc() && a >= s.addr && a < s.addr + s.size) return &s;
  return nullptr;
}

std::string relocation_type_name(std::uint32_t type) {
  switch (type) {
    case R_X86_64_NONE: return "NONE";
    case R_X86_64_64: return "64";
    case R_X86_64_PC32: return "PC32";
    case R_X86_64_GOT32: return "GOT32";
    case R_X86_64_PLT32: return "PLT32";
    case R_X86_64_COPY: return "COPY";
    case R_X86_64_GLOB_DAT: return "GLOB_DAT";
    case R_X86_64_JUMP_SLOT: return "JUMP_SLOT";
    case R_X86_64_RELATIVE: return "RELATIVE";
    case R_X86_64_GOTPCREL: return "GOTPCREL";
    case R_X86_64_32: return "32";
    case R_X86_64_32S: return "32S";
    case R_X86_64_16: return "16";
    case R_X86_64_PC16: return "PC16";
    case R_X86_64_8: return "8";
    case R_X86_64_PC8: return "PC8";
    case R_X86_64_PC64: return "PC64";
    case R_X86_64_GOTOFF64: return "GOTOFF64";
    case R_X86_64_GOTPC32: return "GOTPC32";
    case R_X86_64_TPOFF32: return "TPOFF32";
    case R_X86_64_TPOFF64: return "TPOFF64";
    case R_X86_64_IRELATIVE: return "IRELATIVE";
    case R_X86_64_GOTPCRELX: return "GOTPCRELX";
    case R_X86_64_REX_GOTPCRELX: return "REX_GOTPCRELX";
    default: return "TYPE" + std::to_string(type);
  }
}

std::string_view error_kind_name(ElfErrorKind kind) {
  switch (kind) {
    case ElfErrorKind::io: return "IoError";
    case ElfErrorKind::bad_magic: return "NotElf";
    case ElfErrorKind::unsupported_class: return "UnsupportedClass";
    case ElfErrorKind::unsupported_machine: return "UnsupportedMachine";
    case ElfErrorKind::truncated: return "MalformedHeader";
  }
  return "MalformedHeader";
}

ElfImage parse_elf(const std::vector<std::uint8_t>& file) {
  if (file.size() < EI_NIDENT || std::memcmp(file.data(), ELFMAG, SELFMAG) != 0)
    throw ElfError(ElfErrorKind::bad_magic, "not an ELF file");
  if (file[EI_CLASS] != ELFCLASS64)
    throw ElfError(ElfErrorKind::unsupported_class, "only ELF64 is supported");
  if (file[EI_DATA] != ELFDATA2LSB)
    throw ElfError(ElfErrorKind::unsupported_class, "only little-endian ELF is supported");
  auto eh = read_at<Elf64_Ehdr>(file, 0);
  if (eh.e_machine != EM_X86_64) throw ElfError(ElfErrorKind::unsupported_machine, "only x86-64 is supported");

  ElfImage img;
  img.entry = eh.e_entry;
  img.type = eh.e_type;
  std::vector<Elf64_Shdr> headers;
  for (std::uint16_t i = 0; i < eh.e_shnum; ++i)
    headers.push_back(read_at<Elf64_Shdr>(file, eh.e_shoff + static_cast<std::uint64_t>(i) * eh.e_shentsize));
  if (headers.empty()) throw ElfError(ElfErrorKind::truncated, "no section headers");
  if (eh.e_shstrndx >= headers.size()) throw ElfError(ElfErrorKind::truncated, "bad section name table index");
  const Elf64_Shdr& shstr = headers[eh.e_shstrndx];
  for (const Elf64_Shdr& h : headers) {
    ElfSection s;
    s.name = read_string(file, shstr, h.sh_name);
    s.type = h.sh_type;
    s.flags = h.sh_flags;
    s.addr = h.sh_addr;
    s.size = h.sh_size;
    s.align = h.sh_addralign;
    s.link = h.sh_link;
    s.info = h.sh_info;
    if (h.sh_type != SHT_NOBITS && h.sh_type != SHT_NULL && h.sh_size) {
      if (h.sh_offset > file.size() || file.size() - h.sh_offset < h.sh_size)
        throw ElfError(ElfErrorKind::truncated, "section " + s.name + " extends past end of file");
      s.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(h.sh_offset),
                     file.begin() + static_cast<std::ptrdiff_t>(h.sh_offset + h.sh_size));
    }
    img.sections.push_back(std::move(s));
  }

  // Symbol tables, kept per table so relocations can resolve indices.
  std::vector<std::vector<ElfSymbol>> tables(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const Elf64_Shdr& h = headers[i];
    if (h.sh_type != SHT_SYMTAB && h.sh_type != SHT_DYNSYM) continue;
    if (h.sh_link >= headers.size()) throw ElfError(ElfErrorKind::truncated, "bad symbol string table link");
    const Elf64_Shdr& strtab = headers[h.sh_link];
    std::uint64_t n = h.sh_entsize ? h.sh_size / h.sh_entsize : 0;
    for (std::uint64_t k = 0; k < n; ++k) {
      auto sym = read_at<Elf64_Sym>(file, h.sh_offset + k * h.sh_entsize);
      ElfSymbol s;
      s.name = read_string(file, strtab, sym.st_name);
      s.value = sym.st_value;
      s.size = sym.st_size;
      s.type = symbol_type(ELF64_ST_TYPE(sym.st_info));
      s.bind = symbol_bind(ELF64_ST_BIND(sym.st_info));
      s.shndx = sym.st_shndx;
      s.dynamic = h.sh_type == SHT_DYNSYM;
      if (s.type == "SECTION" && s.shndx < img.sections.size()) s.name = img.sections[s.shndx].name;
      tables[i].push_back(s);
      if (k > 0) img.symbols.push_back(s);
    }
  }

  for (std::size_t i = 0; i < headers.size(); ++i) {
    const Elf64_Shdr& h = headers[i];
    if (h.sh_type != SHT_RELA) continue;
    std::uint64_t n = h.sh_entsize ? h.sh_size / h.sh_entsize : 0;
    const std::vector<ElfSymbol>* symtab = h.sh_link < tables.size() ? &tables[h.sh_link] : nullptr;
    for (std::uint64_t k = 0; k < n; ++k) {
      auto rel = read_at<Elf64_Rela>(file, h.sh_offset + k * h.sh_entsize);
      ElfRelocation r;
      r.offset = rel.r_offset;
      r.type = ELF64_R_TYPE(rel.r_info);
      r.type_name = relocation_type_name(r.type);
      r.addend = rel.r_addend;
      r.target_section = h.sh_info;
      r.dynamic = (h.sh_flags & SHF_ALLOC) != 0;
      std::uint32_t si = ELF64_R_SYM(rel.r_info);
      if (symtab && si < symtab->size()) {
        const ElfSymbol& s = (*symtab)[si];
        r.symbol = s.name;
        r.symbol_shndx = s.shndx;
        r.symbol_value = s.value;
        r.symbol_type = s.type;
        r.symbol_bind = s.bind;
      }
      img.relocations.push_back(r);
    }
  }

  for (const Elf64_Shdr& h : headers) {
    if (h.sh_type != SHT_DYNAMIC) continue;
    if (h.sh_link >= headers.size()) break;
    const Elf64_Shdr& strtab = headers[h.sh_link];
    for (std::uint64_t off = 0; off + sizeof(Elf64_Dyn) <= h.sh_size; off += sizeof(Elf64_Dyn)) {
      auto d = read_at<Elf64_Dyn>(file, h.sh_offset + off);
      if (d.d_tag == DT_NULL) break;
      if (d.d_tag == DT_NEEDED) img.needed.push_back(read_string(file, strtab, static_cast<std::uint32_t>(d.d_un.d_val)));
    }
  }
  return img;
}

ElfImage load_elf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ElfError(ElfErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_elf(file);
}

}  // namespace rdis::elf
