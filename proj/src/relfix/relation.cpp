#include "rdis/relfix/relation.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace rdis::relfix {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

std::uint64_t hash_values(std::span<const Value> values) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ values.size();
  for (Value v : values) h = mix(h ^ static_cast<std::uint64_t>(v)) + 0x9e3779b97f4a7c15ULL;
  return h;
}

bool typed_less(std::span<const ColumnKind> schema, std::span<const Value> a,
                std::span<const Value> b) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (a[i] == b[i]) continue;
    switch (schema[i]) {
      case ColumnKind::address:
        return static_cast<std::uint64_t>(a[i]) < static_cast<std::uint64_t>(b[i]);
      case ColumnKind::number:
        return a[i] < b[i];
      case ColumnKind::text:
        return text_of(a[i]) < text_of(b[i]);
    }
  }
  return false;
}

Relation::Relation(std::string name, std::vector<ColumnKind> schema)
    : name_(std::move(name)), schema_(std::move(schema)) {}

std::uint64_t Relation::hash_row(std::span<const Value> tuple) const { return hash_values(tuple); }

std::int64_t Relation::find_slot(std::span<const Value> tuple, std::uint64_t h) const {
  if (slots_.empty()) return -1;
  const std::size_t mask = slots_.size() - 1;
  const std::size_t n = arity();
  for (std::size_t i = h & mask;; i = (i + 1) & mask) {
    std::uint32_t s = slots_[i];
    if (s == 0) return -static_cast<std::int64_t>(i) - 2;
    const Value* r = data_.data() + static_cast<std::size_t>(s - 1) * n;
    if (n == 0 || std::memcmp(r, tuple.data(), n * sizeof(Value)) == 0) return static_cast<std::int64_t>(i);
  }
}

void Relation::grow() {
  std::size_t cap = slots_.empty() ? 16 : slots_.size() * 2;
  slots_.assign(cap, 0);
  const std::size_t mask = cap - 1;
  for (std::size_t r = 0; r < rows_; ++r) {
    std::size_t i = hash_row(row(r)) & mask;
    while (slots_[i] != 0) i = (i + 1) & mask;
    slots_[i] = static_cast<std::uint32_t>(r + 1);
  }
}

bool Relation::insert(std::span<const Value> tuple) {
  if ((rows_ + 1) * 2 > slots_.size()) grow();
  std::uint64_t h = hash_row(tuple);
  std::int64_t slot = find_slot(tuple, h);
  if (slot >= 0) return false;
  std::size_t free_slot = static_cast<std::size_t>(-slot - 2);
  data_.insert(data_.end(), tuple.begin(), tuple.end());
  slots_[free_slot] = static_cast<std::uint32_t>(rows_ + 1);
  index_row(static_cast<std::uint32_t>(rows_));
  ++rows_;
  return true;
}

bool Relation::contains(std::span<const Value> tuple) const {
  return find_slot(tuple, hash_row(tuple)) >= 0;
}

void Relation::index_row(std::uint32_t id) {
  if (indexes_.empty()) return;
  auto r = row(id);
  Value key[32];
  for (auto& [mask, index] : indexes_) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < arity(); ++c)
      if (mask & (1u << c)) key[k++] = r[c];
    index[hash_values({key, k})].push_back(id);
  }
}

void Relation::ensure_index(std::uint32_t mask) {
  if (indexes_.count(mask)) return;
  auto& index = indexes_[mask];
  Value key[32];
  for (std::uint32_t id = 0; id < rows_; ++id) {
    auto r = row(id);
    std::size_t k = 0;
    for (std::size_t c = 0; c < arity(); ++c)
      if (mask & (1u << c)) key[k++] = r[c];
    index[hash_values({key, k})].push_back(id);
  }
}

const std::vector<std::uint32_t>* Relation::lookup(std::uint32_t mask,
                                                   std::span<const Value> key) const {
  auto it = indexes_.find(mask);
  if (it == indexes_.end()) return nullptr;
  static const std::vector<std::uint32_t> none;
  auto hit = it->second.find(hash_values(key));
  return hit == it->second.end() ? &none : &hit->second;
}

std::vector<Tuple> Relation::sorted_rows() const {
  std::vector<Tuple> out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    out.emplace_back(r.begin(), r.end());
  }
  std::sort(out.begin(), out.end(),
            [&](const Tuple& a, const Tuple& b) { return typed_less(schema_, a, b); });
  return out;
}

void Relation::clear() {
  data_.clear();
  rows_ = 0;
  slots_.clear();
  for (auto& [mask, index] : indexes_) index.clear();
}

}  // namespace rdis::relfix
