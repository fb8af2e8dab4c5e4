#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdis/analyses/analyses.hpp"
#include "rdis/facts/fact_base.hpp"
#include "rdis/ibi/ibi.hpp"
#include "rdis/relfix/database.hpp"
#include "rdis/symbolization/symbolization.hpp"

namespace rdis::pipeline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  ibi::IbiWeights ibi;
  analyses::AnalysisOptions analyses;
  symbolization::SymbolizationOptions symbolization;
  int jobs = 1;

  // key=value lines; '#' starts a comment. Unknown keys and malformed
  // values throw ConfigError.
  void apply(std::istream& in, const std::string& origin);
  void set(const std::string& key, const std::string& value);
  void validate() const;
  // Every key with its effective value, in apply() syntax.
  void print(std::ostream& out) const;
};

struct PipelineResult {
  facts::FactBase facts;
  ibi::CodeLayout layout;
  symbolization::Symbolization symbols;
  std::vector<facts::Address> feedback_targets;  // preliminary jump-table targets fed to IBI
  relfix::Database db;                           // final pass
};

// IBI, analyses and preliminary jump-table detection, then a second IBI pass
// seeded with the table targets, analyses and symbolization.
PipelineResult run(facts::FactBase facts, const PipelineConfig& config);

}  // namespace rdis::pipeline
