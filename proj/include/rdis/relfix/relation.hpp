#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdis/relfix/value.hpp"

namespace rdis::relfix {

using Tuple = std::vector<Value>;

// Append-only set of fixed-arity tuples. Row ids are dense and never reused,
// so the rows added since a given size() form a contiguous range.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, std::vector<ColumnKind> schema);

  const std::string& name() const { return name_; }
  const std::vector<ColumnKind>& schema() const { return schema_; }
  std::size_t arity() const { return schema_.size(); }
  std::size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }

  std::span<const Value> row(std::size_t i) const {
    return {data_.data() + i * arity(), arity()};
  }

  bool insert(std::span<const Value> tuple);
  bool insert(std::initializer_list<Value> tuple) {
    return insert(std::span<const Value>(tuple.begin(), tuple.size()));
  }
  bool contains(std::span<const Value> tuple) const;

  // Bit i of mask selects column i. Rows returned by lookup() may include
  // hash collisions; callers re-check the bound columns.
  void ensure_index(std::uint32_t mask);
  bool has_index(std::uint32_t mask) const { return indexes_.count(mask) != 0; }
  const std::vector<std::uint32_t>* lookup(std::uint32_t mask,
                                           std::span<const Value> key) const;

  // Rows in lexicographic order of their typed values (text by content).
  std::vector<Tuple> sorted_rows() const;

  void clear();

 private:
  std::uint64_t hash_row(std::span<const Value> tuple) const;
  std::int64_t find_slot(std::span<const Value> tuple, std::uint64_t h) const;
  void grow();
  void index_row(std::uint32_t id);

  std::string name_;
  std::vector<ColumnKind> schema_;
  std::vector<Value> data_;
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> slots_;  // row id + 1; 0 marks an empty slot
  std::unordered_map<std::uint32_t,
                     std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>>
      indexes_;
};

std::uint64_t hash_values(std::span<const Value> values);
bool typed_less(std::span<const ColumnKind> schema, std::span<const Value> a,
                std::span<const Value> b);

}  // namespace rdis::relfix
