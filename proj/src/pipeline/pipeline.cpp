#include "rdis/pipeline/pipeline.hpp"

#include <charconv>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rdis::pipeline {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

struct Field {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
};

// `get` only reads through the reference when printing.
template <typename Get>
Field int_ref(Get get) {
  return {[get](const PipelineConfig& c) { return std::to_string(get(const_cast<PipelineConfig&>(c))); },
          [get](PipelineConfig& c, const std::string& k, const std::string& v) { get(c) = parse_int(k, v); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["jobs"] = {[](const PipelineConfig& c) { return std::to_string(c.jobs); },
                 [](PipelineConfig& c, const std::string& k, const std::string& v) {
                   c.jobs = static_cast<int>(parse_int(k, v));
                 }};
    t["ibi.incoming"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.incoming; });
    t["ibi.appears"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.appears; });
    t["ibi.aligned"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.aligned; });
    t["ibi.outgoing"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.outgoing; });
    t["ibi.jump_table_overlap"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.jump_table_overlap; });
    t["ibi.threshold"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.ibi.threshold; });
    t["analyses.step_limit"] = int_ref([](PipelineConfig& c) -> std::int64_t& { return c.analyses.step_limit; });
    t["analyses.call_kills_all"] = {
        [](const PipelineConfig& c) { return std::string(c.analyses.call_kills_all ? "true" : "false"); },
        [](PipelineConfig& c, const std::string& k, const std::string& v) {
          c.analyses.call_kills_all = parse_bool(k, v);
        }};
    using W = symbolization::SymbolizationWeights;
    const std::pair<const char*, std::int64_t W::*> weights[] = {
        {"pointer_to_instruction", &W::pointer_to_instruction},
        {"data_access_match", &W::data_access_match},
        {"symbol_array", &W::symbol_array},
        {"pointed_by_symbol_array", &W::pointed_by_symbol_array},
        {"aligned", &W::aligned},
        {"string_default", &W::string_default},
        {"long_string", &W::long_string},
        {"symbol_symbol", &W::symbol_symbol},
        {"access_conflict", &W::access_conflict},
        {"special_section", &W::special_section},
        {"used_for_address", &W::used_for_address},
        {"uncommon_operation", &W::uncommon_operation},
        {"compared_to_non_address", &W::compared_to_non_address},
        {"data_threshold", &W::data_threshold},
        {"code_threshold", &W::code_threshold},
        {"repair_distance", &W::repair_distance}};
    for (auto [name, member] : weights)
      t[std::string("symbolization.") + name] =
          int_ref([member](PipelineConfig& c) -> std::int64_t& { return c.symbolization.weights.*member; });
    t["symbolization.special_sections"] = {
        [](const PipelineConfig& c) {
          std::string s;
          for (const std::string& n : c.symbolization.special_sections) s += (s.empty() ? "" : ",") + n;
          return s;
        },
        [](PipelineConfig& c, const std::string&, const std::string& v) {
          c.symbolization.special_sections.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ','))
            if (!trim(item).empty()) c.symbolization.special_sections.push_back(trim(item));
        }};
    return t;
  }();
  return table;
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(*this, key, value);
}

void PipelineConfig::apply(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void PipelineConfig::validate() const {
  if (analyses.step_limit < 1) throw ConfigError("analyses.step_limit must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (symbolization.weights.repair_distance < 0) throw ConfigError("symbolization.repair_distance must be >= 0");
}

void PipelineConfig::print(std::ostream& out) const {
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(*this) << '\n';
}

PipelineResult run(facts::FactBase facts, const PipelineConfig& config) {
  config.validate();
  PipelineResult r;
  {
    relfix::Database db;
    facts::to_database(facts, db);
    ibi::CodeLayout layout = ibi::run_ibi(facts, {}, config.ibi, config.jobs, db);
    analyses::run_analyses(config.analyses, config.jobs, db);
    r.feedback_targets =
        symbolization::preliminary_jump_targets(facts, layout, config.symbolization, config.jobs, db);
  }
  facts::to_database(facts, r.db);
  r.layout = ibi::run_ibi(facts, r.feedback_targets, config.ibi, config.jobs, r.db);
  analyses::run_analyses(config.analyses, config.jobs, r.db);
  r.symbols = symbolization::run_symbolization(facts, r.layout, config.symbolization, config.jobs, r.db);
  r.facts = std::move(facts);
  return r;
}

}  // namespace rdis::pipeline
