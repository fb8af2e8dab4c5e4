#include "rdis/relfix/database.hpp"

#include "rdis/relfix/error.hpp"

namespace rdis::relfix {

Relation& Database::add(const std::string& name, const std::vector<ColumnKind>& schema) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    Relation& r = relations_[it->second];
    if (r.schema() != schema) throw Error(ErrorKind::schema_mismatch, "schema differs for " + name);
    return r;
  }
  by_name_.emplace(name, relations_.size());
  relations_.emplace_back(name, schema);
  return relations_.back();
}

Relation* Database::find(std::string_view name) {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &relations_[it->second];
}

const Relation* Database::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &relations_[it->second];
}

Relation& Database::at(std::string_view name) {
  Relation* r = find(name);
  if (!r) throw Error(ErrorKind::unknown_relation, std::string(name));
  return *r;
}

const Relation& Database::at(std::string_view name) const {
  const Relation* r = find(name);
  if (!r) throw Error(ErrorKind::unknown_relation, std::string(name));
  return *r;
}

std::vector<std::string> Database::names() const {
  std::vector<std::string> out;
  for (const Relation& r : relations_) out.push_back(r.name());
  return out;
}

void Database::import(const Database& other, std::string_view name) {
  const Relation& src = other.at(name);
  Relation& dst = add(src.name(), src.schema());
  for (std::size_t i = 0; i < src.size(); ++i) dst.insert(src.row(i));
}

}  // namespace rdis::relfix
