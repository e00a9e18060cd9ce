#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tws/errors.hpp"
#include "tws/harness.hpp"

using namespace tws;
namespace fs = std::filesystem;

namespace {

const json dirac0 = {{"atoms", {{{"x", 0.0}, {"m", 1.0}}}}};
const json unit = {{"resolution", 0}, {"cells", {{{"k", 0}, {"w", 1.0}}}}};

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> r;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tws_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void put(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string("TWS_THREADS=1 ") + TWS_CLI + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config rejects unknown keys and bad values with a location") {
  auto loc = [](const json& j) {
    try {
      ExperimentConfig::from_json(j);
    } catch (const ParseError& e) {
      return e.location;
    }
    return std::string("none");
  };
  CHECK(loc({{"seed", 1}, {"sede", 2}}) == "config.sede");
  CHECK(loc({{"p", 1.0}}) == "config.p");
  CHECK(loc({{"sigma", unit}}) == "config.omega");
  CHECK(loc({{"family", {{"depth", 2}, {"dpeth", 3}}}}) == "config.family.dpeth");
  CHECK(loc({{"search", {{"count", -1}}}}) == "config.search.count");
  CHECK(loc({{"sigma", unit}, {"omega", {{"cells", {{{"k", 0}, {"w", -1.0}}}}}}}) == "config.omega.cells[0].w");
  CHECK(loc({{"asym_c0", 2.0}}) == "config.asym_c0");
  CHECK(loc({{"corpus", {{"levels", 40}}}}) == "corpus.levels");
  CHECK(loc({{"p", 2.0}}) == "none");
}

TEST_CASE("reseeding changes every sub-seed") {
  ExperimentConfig a = ExperimentConfig::from_json({{"seed", 3}});
  ExperimentConfig b = a;
  b.reseed(4);
  CHECK(a.family.seed != b.family.seed);
  CHECK(a.op.seed != b.op.seed);
  CHECK(a.corpus.seed != b.corpus.seed);
  b.reseed(3);
  CHECK(a.family.seed == b.family.seed);
  CHECK(a.corpus.seed == b.corpus.seed);
}

TEST_CASE("plotdata of a point mass") {
  const auto c = ExperimentConfig::from_json(
      {{"sigma", dirac0}, {"omega", unit}, {"plot", {{"lo", 0.5}, {"hi", 8.0}, {"points", 9}}}});
  std::string header;
  const auto rows = parse_csv(cmd_plotdata(c, "t_natural_profile"), header);
  CHECK(header == "x,t_natural,t_flat,maximal");
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    const double x = r[0];
    // the maximal function of a unit atom at 0 is 1/|x|
    CHECK(r[3] == doctest::Approx(1.0 / x).epsilon(1e-12));
    // the kernel integrated against the atom is 1/x; truncations never exceed it
    CHECK(r[1] <= 1.0 / x * (1 + 1e-9));
    CHECK(r[1] >= 0.5 / x);
    CHECK(r[2] <= r[1] + 1e-12);
  }
  CHECK(rows.front()[0] == doctest::Approx(0.5));
  CHECK(rows.back()[0] == doctest::Approx(8.0));
}

TEST_CASE("plotdata poisson profile and unknown quantity") {
  const auto c = ExperimentConfig::from_json({{"sigma", dirac0}, {"omega", unit}, {"plot", {{"x0", 0.0}}}});
  std::string header;
  const auto rows = parse_csv(cmd_plotdata(c, "poisson_profile"), header);
  CHECK(header.rfind("length,", 0) == 0);
  CHECK(rows.size() == 15);
  CHECK_THROWS_AS(cmd_plotdata(c, "nonsense"), ParseError);
}

TEST_CASE("search is ranked and bounded") {
  auto c = ExperimentConfig::from_json({{"seed", 9}, {"search", {{"count", 4}, {"top_k", 2}}}});
  const json r = cmd_search(c, true);
  REQUIRE(r["findings"].size() == 2);
  CHECK(r["findings"][0]["ratio"].get<double>() >= r["findings"][1]["ratio"].get<double>());
  CHECK(r["verified"].get<bool>());
  CHECK(r["bound"]["holds"].get<bool>());
  c.search.top_k = 0;
  CHECK(cmd_search(c, false)["findings"].empty());
  c.search.target = "no/such";
  CHECK_THROWS_AS(cmd_search(c, false), ParseError);
}

TEST_CASE("constants on a configured pair") {
  const auto c = ExperimentConfig::from_json({{"sigma", unit}, {"omega", unit}});
  const json r = cmd_constants(c, true);
  CHECK(r["chain_holds"].get<bool>());
  CHECK(r["verified"].get<bool>());
  bool seen_ap = false;
  for (const auto& rep : r["reports"])
    if (rep["condition"] == "ap") {
      seen_ap = true;
      // one unit cell against itself: the average product peaks at the cell
      CHECK(rep["estimate"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    }
  CHECK(seen_ap);
}

TEST_CASE("cli exit codes") {
  const fs::path d = scratch("cli");
  put(d / "good.json", R"({"seed": 3, "search": {"count": 2, "top_k": 1}})");
  put(d / "typo.json", R"({"seed": 3, "sede": 1})");
  put(d / "broken.json", R"({"seed": 3,)");
  put(d / "badmeasure.json", R"({"sigma": "m.json", "omega": "m.json"})");
  put(d / "m.json", R"({"cells": [{"k": 0, "w": "x"}]})");
  const std::string out = " --out " + (d / "out").string();
  CHECK(run_cli("check measure --config " + (d / "good.json").string() + out) == 0);
  CHECK(fs::exists(d / "out" / "check_measure.json"));
  CHECK(run_cli("check nosuchsuite --config " + (d / "good.json").string() + out) == 2);
  CHECK(run_cli("check --config " + (d / "typo.json").string() + out) == 2);
  CHECK(run_cli("check --config " + (d / "broken.json").string() + out) == 2);
  CHECK(run_cli("constants --config " + (d / "badmeasure.json").string() + out) == 2);
  CHECK(run_cli("constants --config " + (d / "missing.json").string() + out) == 2);
  CHECK(run_cli("frobnicate --config " + (d / "good.json").string()) == 2);
  CHECK(run_cli("search --config " + (d / "good.json").string() + out + " --verify-witness") == 0);
  CHECK(run_cli("plotdata superlevel_sets --config " + (d / "good.json").string() + out) == 0);
  CHECK(fs::exists(d / "out" / "superlevel_sets.csv"));
  fs::remove_all(d);
}
