#include "tws/corpus.hpp"

#include <cmath>

#include "tws/errors.hpp"

namespace tws {

json CorpusSpec::to_json() const {
  return {{"root_scale", root_scale},
          {"levels", levels},
          {"left", left},
          {"factors", factors},
          {"atom_probability", atom_probability},
          {"atom_mass", atom_mass},
          {"total_mass", total_mass},
          {"seed", seed}};
}

CorpusSpec CorpusSpec::from_json(const json& j) {
  CorpusSpec s;
  s.root_scale = j.value("root_scale", s.root_scale);
  s.levels = j.value("levels", s.levels);
  s.left = j.value("left", s.left);
  s.factors = j.value("factors", s.factors);
  s.atom_probability = j.value("atom_probability", s.atom_probability);
  s.atom_mass = j.value("atom_mass", s.atom_mass);
  s.total_mass = j.value("total_mass", s.total_mass);
  s.seed = j.value("seed", s.seed);
  if (s.levels < 0 || s.levels > 24) throw ParseError("corpus.levels", "must be in [0, 24]");
  if (s.factors.empty()) throw ParseError("corpus.factors", "must not be empty");
  for (double f : s.factors)
    if (!(f > 0.0)) throw ParseError("corpus.factors", "factors must be positive");
  if (s.atom_probability < 0.0 || s.atom_probability > 1.0)
    throw ParseError("corpus.atom_probability", "must be in [0, 1]");
  return s;
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 stream(uint64_t seed, uint64_t index) { return std::mt19937_64(mix_seed(seed, index)); }

StepAtomicMeasure cascade_measure(const CorpusSpec& spec, std::mt19937_64& rng) {
  const int L = spec.levels - spec.root_scale;  // cell resolution
  const double first = std::ldexp(spec.left, L);
  if (first != std::floor(first)) throw PreconditionError("corpus: left end is not on the cell grid");
  std::vector<double> w{1.0};
  for (int l = 0; l < spec.levels; ++l) {
    std::vector<double> next;
    next.reserve(2 * w.size());
    for (double d : w)
      for (int c = 0; c < 2; ++c) next.push_back(d * spec.factors[rng() % spec.factors.size()]);
    w = std::move(next);
  }
  double total = 0.0;
  for (double d : w) total += d;
  total *= std::ldexp(1.0, -L);
  std::vector<Atom> atoms;
  // draw unconditionally so the stream position does not depend on the outcome
  const double u = std::ldexp(double(rng() >> 11), -53);
  const uint64_t where = rng();
  if (u < spec.atom_probability) {
    const int64_t n = int64_t(1) << (spec.levels + 2);
    const double x = spec.left + std::ldexp(double(where % n), -(L + 2));
    atoms.push_back({x, spec.atom_mass * total});
    total += spec.atom_mass * total;
  }
  const double scale = spec.total_mass > 0.0 ? spec.total_mass / total : 1.0;
  std::vector<std::pair<int64_t, double>> cells;
  for (std::size_t i = 0; i < w.size(); ++i)
    cells.push_back({static_cast<int64_t>(first) + static_cast<int64_t>(i), w[i] * scale});
  for (auto& a : atoms) a.m *= scale;
  return StepAtomicMeasure::from_cells(L, cells, atoms);
}

WeightPair corpus_pair(const CorpusSpec& spec, uint64_t index, double p) {
  auto rs = stream(spec.seed, 2 * index);
  auto ro = stream(spec.seed, 2 * index + 1);
  StepAtomicMeasure s = cascade_measure(spec, rs);
  StepAtomicMeasure o = cascade_measure(spec, ro);
  // keep the pair free of common atoms
  if (!s.atoms().empty() && !o.atoms().empty() && s.atoms().front().x == o.atoms().front().x) {
    const auto& a = o.atoms().front();
    o = o.restricted_complement(Interval(a.x, std::nextafter(a.x, INFINITY))) +
        StepAtomicMeasure::dirac(a.x + std::ldexp(1.0, spec.root_scale - spec.levels - 3), a.m);
  }
  return {std::move(s), std::move(o), p};
}

}  // namespace tws
