#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "tws/checks.hpp"
#include "tws/conditions.hpp"
#include "tws/corpus.hpp"

namespace tws {

using json = nlohmann::json;

struct SearchSpec {
  std::string target = "strengthened/ap";
  int count = 20;  // generated pairs
  int top_k = 5;
};

/// Everything a run needs. Measure entries are inline objects or paths
/// relative to the config file. The master seed drives every random choice.
struct ExperimentConfig {
  double p = 2.0;
  uint64_t seed = 1;
  std::optional<StepAtomicMeasure> sigma, omega;
  FamilySpec family{6, 200, 1, true, 400000};
  FamilySpec op_family{2, 2, 1, true, 400000};
  OperatorBudget op{{8, false, 0}, 4, 2, 2, 2, 1};
  PartitionSearch partition{4, 2, 2};
  double asym_c0 = 3.0;
  CorpusSpec corpus;
  int corpus_pairs = 3;
  std::string suite = "all";
  SearchSpec search;
  json plot = json::object();

  static ExperimentConfig from_json(const json& j, const std::string& base_dir = ".");
  /// Re-derives the sub-seeds after the master seed changed.
  void reseed(uint64_t s);
  /// The configured pair, or the first corpus pair.
  WeightPair weights() const;
  CheckOptions check_options() const;
  json budgets_json() const;
};

ExperimentConfig load_config(const std::string& path);

/// Every testing constant of the pair plus the chain diagnostics. With verify,
/// each witness is re-evaluated and a mismatch beyond 1e-9 clears "verified".
json cmd_constants(const ExperimentConfig& c, bool verify);

/// Ranked findings over generated pairs for one of search_targets().
json cmd_search(const ExperimentConfig& c, bool verify);
const std::vector<std::string>& search_targets();

/// CSV text (header row, comma separated) for one of plot_quantities().
std::string cmd_plotdata(const ExperimentConfig& c, const std::string& quantity);
const std::vector<std::string>& plot_quantities();

}  // namespace tws
