#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdis/relfix/database.hpp"
#include "rdis/relfix/relation.hpp"

namespace rdis::relfix {

// One row per line, tab-separated. Address columns are lowercase 0x-hex,
// number columns signed decimal, text columns raw (no tabs or newlines).
std::string format_value(ColumnKind kind, Value v);
Value parse_value(ColumnKind kind, std::string_view field);

void write_relation(std::ostream& out, const Relation& rel);
void read_relation(std::istream& in, Relation& rel, const std::string& origin);

// <dir>/<name>.facts for each listed relation; rows sorted.
void dump_relations(const Database& db, const std::vector<std::string>& names,
                    const std::filesystem::path& dir);
// Missing files load as empty relations.
void load_relations(Database& db, const std::filesystem::path& dir);

}  // namespace rdis::relfix
