#pragma once

#include <string>
#include <string_view>
#include <deque>
#include <unordered_map>
#include <vector>

#include "rdis/relfix/relation.hpp"

namespace rdis::relfix {

class Database {
 public:
  Relation& add(const std::string& name, const std::vector<ColumnKind>& schema);
  Relation* find(std::string_view name);
  const Relation* find(std::string_view name) const;
  Relation& at(std::string_view name);
  const Relation& at(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }

  // Declaration order.
  std::vector<std::string> names() const;

  // Copies `name` from `other` (creating it here if needed).
  void import(const Database& other, std::string_view name);

 private:
  std::deque<Relation> relations_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace rdis::relfix
