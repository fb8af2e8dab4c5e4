#include "rdis/relfix/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rdis/relfix/error.hpp"

namespace rdis::relfix {

std::string format_value(ColumnKind kind, Value v) {
  switch (kind) {
    case ColumnKind::address: {
      std::ostringstream s;
      s << "0x" << std::hex << static_cast<std::uint64_t>(v);
      return s.str();
    }
    case ColumnKind::number:
      return std::to_string(v);
    case ColumnKind::text:
      return text_of(v);
  }
  return {};
}

Value parse_value(ColumnKind kind, std::string_view field) {
  switch (kind) {
    case ColumnKind::address: {
      if (field.size() < 3 || field[0] != '0' || field[1] != 'x')
        throw Error(ErrorKind::parse_error, "expected 0x-prefixed address, got '" + std::string(field) + "'");
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(field.data() + 2, field.data() + field.size(), v, 16);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw Error(ErrorKind::parse_error, "bad address '" + std::string(field) + "'");
      return static_cast<Value>(v);
    }
    case ColumnKind::number: {
      Value v = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v, 10);
      if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw Error(ErrorKind::parse_error, "bad number '" + std::string(field) + "'");
      return v;
    }
    case ColumnKind::text:
      return intern(field);
  }
  return 0;
}

void write_relation(std::ostream& out, const Relation& rel) {
  for (const Tuple& row : rel.sorted_rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << '\t';
      out << format_value(rel.schema()[c], row[c]);
    }
    out << '\n';
  }
}

void read_relation(std::istream& in, Relation& rel, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<Value> tuple(rel.arity());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && rel.arity() > 1) continue;
    std::size_t start = 0;
    for (std::size_t c = 0; c < rel.arity(); ++c) {
      std::size_t tab = line.find('\t', start);
      bool last = c + 1 == rel.arity();
      if (last != (tab == std::string::npos))
        throw Error(ErrorKind::parse_error, origin + ":" + std::to_string(lineno) + ": expected " +
                                                std::to_string(rel.arity()) + " fields");
      std::string_view field(line.data() + start, (last ? line.size() : tab) - start);
      try {
        tuple[c] = parse_value(rel.schema()[c], field);
      } catch (const Error& e) {
        throw Error(ErrorKind::parse_error, origin + ":" + std::to_string(lineno) + ": " + e.detail());
      }
      start = tab + 1;
    }
    rel.insert(tuple);
  }
}

void dump_relations(const Database& db, const std::vector<std::string>& names,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const std::string& name : names) {
    std::ofstream out(dir / (name + ".facts"), std::ios::binary);
    if (!out) throw Error(ErrorKind::parse_error, "cannot write " + (dir / (name + ".facts")).string());
    write_relation(out, db.at(name));
  }
}

void load_relations(Database& db, const std::filesystem::path& dir) {
  for (const std::string& name : db.names()) {
    Relation& rel = db.at(name);
    auto path = dir / (name + ".facts");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    read_relation(in, rel, path.string());
  }
}

}  // namespace rdis::relfix
