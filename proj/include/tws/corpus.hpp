#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "json.hpp"
#include "tws/measure.hpp"

namespace tws {

using json = nlohmann::json;

/// Random step weights from a multiplicative cascade: a root cell of length
/// 2^root_scale with unit density is split `levels` times, each child taking
/// its parent's density times a factor drawn from `factors`. Neighbouring
/// densities then differ by a bounded ratio, which keeps the weight doubling.
struct CorpusSpec {
  int root_scale = 2;
  int levels = 4;
  double left = 0.0;  // left end of the root cell, a multiple of the cell length
  std::vector<double> factors{0.5, 1.0, 2.0};
  double atom_probability = 0.0;  // chance of one atom per measure
  double atom_mass = 0.5;         // relative to the total mass
  double total_mass = 0.0;        // rescale to this total when > 0
  uint64_t seed = 1;
  json to_json() const;
  static CorpusSpec from_json(const json& j);
};

/// Independent stream for (seed, index); equal inputs give equal streams.
std::mt19937_64 stream(uint64_t seed, uint64_t index);
uint64_t mix_seed(uint64_t seed, uint64_t index);

StepAtomicMeasure cascade_measure(const CorpusSpec& spec, std::mt19937_64& rng);

/// The index-th pair of the corpus: sigma and omega from separate streams.
WeightPair corpus_pair(const CorpusSpec& spec, uint64_t index, double p);

}  // namespace tws
