#include "tws/measure_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tws/errors.hpp"

namespace tws {
namespace {

double finite_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where, "non-finite value");
  return v;
}

int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where, "expected an integer");
  return j.get<int64_t>();
}

}  // namespace

StepAtomicMeasure measure_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "measure must be an object");
  const int L = j.contains("resolution") ? static_cast<int>(integer(j["resolution"], where + ".resolution")) : 0;
  if (L < -60 || L > 60) throw ParseError(where + ".resolution", "out of range [-60, 60]");
  const bool sgn = j.value("signed", false);

  std::vector<Segment> segs;
  if (j.contains("cells")) {
    const auto& cells = j["cells"];
    if (!cells.is_array()) throw ParseError(where + ".cells", "expected an array");
    for (size_t i = 0; i < cells.size(); ++i) {
      const std::string at = where + ".cells[" + std::to_string(i) + "]";
      if (!cells[i].is_object() || !cells[i].contains("k") || !cells[i].contains("w"))
        throw ParseError(at, "expected {\"k\": int, \"w\": real}");
      const int64_t k = integer(cells[i]["k"], at + ".k");
      const double w = finite_number(cells[i]["w"], at + ".w");
      if (!sgn && w < 0) throw ParseError(at + ".w", "negative weight in unsigned measure");
      segs.push_back({std::ldexp(static_cast<double>(k), -L), std::ldexp(static_cast<double>(k + 1), -L), w});
    }
  }
  if (j.contains("segments")) {
    const auto& ss = j["segments"];
    if (!ss.is_array()) throw ParseError(where + ".segments", "expected an array");
    for (size_t i = 0; i < ss.size(); ++i) {
      const std::string at = where + ".segments[" + std::to_string(i) + "]";
      if (!ss[i].is_object()) throw ParseError(at, "expected {\"a\", \"b\", \"w\"}");
      const double a = finite_number(ss[i].value("a", json()), at + ".a");
      const double b = finite_number(ss[i].value("b", json()), at + ".b");
      const double w = finite_number(ss[i].value("w", json()), at + ".w");
      if (!(a < b)) throw ParseError(at, "requires a < b");
      if (!sgn && w < 0) throw ParseError(at + ".w", "negative weight in unsigned measure");
      segs.push_back({a, b, w});
    }
  }
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const auto& as = j["atoms"];
    if (!as.is_array()) throw ParseError(where + ".atoms", "expected an array");
    for (size_t i = 0; i < as.size(); ++i) {
      const std::string at = where + ".atoms[" + std::to_string(i) + "]";
      if (!as[i].is_object() || !as[i].contains("x") || !as[i].contains("m"))
        throw ParseError(at, "expected {\"x\": real, \"m\": real}");
      const double x = finite_number(as[i]["x"], at + ".x");
      const double m = finite_number(as[i]["m"], at + ".m");
      if (!sgn && m < 0) throw ParseError(at + ".m", "negative mass in unsigned measure");
      atoms.push_back({x, m});
    }
  }
  try {
    return StepAtomicMeasure::from_segments(L, std::move(segs), std::move(atoms), sgn);
  } catch (const PreconditionError& e) {
    throw ParseError(where, e.what());
  }
}

StepAtomicMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + " (byte " + std::to_string(e.byte) + ")", "invalid JSON");
  }
  return measure_from_json(j, path);
}

json measure_to_json(const StepAtomicMeasure& mu) {
  json j;
  const int L = mu.resolution();
  j["resolution"] = L;
  j["signed"] = mu.is_signed();
  bool on_cells = true;
  for (const auto& s : mu.segments()) {
    const double ka = std::ldexp(s.a, L), kb = std::ldexp(s.b, L);
    if (ka != std::floor(ka) || kb != std::floor(kb) || std::fabs(kb - ka) > 1e7) {
      on_cells = false;
      break;
    }
  }
  if (on_cells) {
    json cells = json::array();
    for (const auto& s : mu.segments()) {
      const auto ka = static_cast<int64_t>(std::ldexp(s.a, L));
      const auto kb = static_cast<int64_t>(std::ldexp(s.b, L));
      for (int64_t k = ka; k < kb; ++k) cells.push_back({{"k", k}, {"w", s.density}});
    }
    j["cells"] = std::move(cells);
  } else {
    json segs = json::array();
    for (const auto& s : mu.segments()) segs.push_back({{"a", s.a}, {"b", s.b}, {"w", s.density}});
    j["segments"] = std::move(segs);
  }
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"x", a.x}, {"m", a.m}});
  j["atoms"] = std::move(atoms);
  return j;
}

}  // namespace tws
