#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tws/conditions.hpp"
#include "tws/corpus.hpp"

namespace tws {

using json = nlohmann::json;

/// One checked property. `criterion` ties it to an acceptance item (0 = none).
/// Soft assertions are reported but never change the exit status.
struct Assertion {
  std::string suite;
  std::string name;
  int criterion = 0;
  bool passed = true;
  bool hard = true;
  json measured = json::object();
  double seconds = 0.0;  // wall time, kept out of the report
  json to_json() const;
};

struct CheckOptions {
  uint64_t seed = 1;
  CorpusSpec corpus;  // weight pairs for the condition chains
  int corpus_pairs = 3;
  FamilySpec family{6, 200, 1, true, 400000};
  FamilySpec op_family{2, 2, 1, true, 400000};  // cubes for the operator testing searches
  OperatorBudget op{{8, false, 0}, 4, 2, 2, 2, 1};
  PartitionSearch partition{4, 2, 2};
  std::optional<WeightPair> weights;  // configured pair, checked alongside the corpus
};

struct CheckResult {
  std::string suite;
  uint64_t seed = 1;
  std::vector<Assertion> assertions;
  bool passed() const;  // every hard assertion
  json to_json() const;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Runs one suite (or "all"). Throws ParseError for an unknown name.
/// `progress` sees every assertion as it finishes.
CheckResult run_check(const std::string& suite, const CheckOptions& o,
                      const std::function<void(const Assertion&)>& progress = {});

}  // namespace tws
