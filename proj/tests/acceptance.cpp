// Acceptance run: one line per criterion, exit 1 if any fails.
// usage: acceptance [seed]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include "tws/checks.hpp"
#include "tws/harness.hpp"

using namespace tws;
namespace fs = std::filesystem;

namespace {

const char* titles[13] = {"",
                          "measure algebra exactness",
                          "analytic lebesgue constants",
                          "geometric tail exactness",
                          "whitney decomposition",
                          "calderon-zygmund decomposition",
                          "maximum principle stability",
                          "l-level estimate",
                          "neccinequ",
                          "besicovitch overlap",
                          "domination",
                          "kernel lower bound",
                          "determinism"};

// runtime ceilings in seconds
const double limits[13] = {0, 5, 30, 5, 120, 120, 300, 180, 60, 30, 300, 5, 0};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  const uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;

  ExperimentConfig cfg = ExperimentConfig::from_json({{"seed", seed}});
  const auto res = run_check("all", cfg.check_options());

  std::map<int, std::vector<const Assertion*>> by;
  for (const auto& a : res.assertions)
    if (a.criterion > 0) by[a.criterion].push_back(&a);

  int failed = 0;
  auto line = [&](int c, bool ok, double secs, const std::string& detail) {
    const bool in_time = limits[c] <= 0 || secs <= limits[c];
    std::printf("[%s] %2d %-32s %7.2fs  %s%s\n", ok && in_time ? "PASS" : "FAIL", c, titles[c], secs,
                detail.c_str(), in_time ? "" : "  (over time limit)");
    std::fflush(stdout);
    if (!ok || !in_time) ++failed;
  };

  for (int c = 1; c <= 11; ++c) {
    const auto it = by.find(c);
    if (it == by.end()) {
      line(c, false, 0.0, "no assertion");
      continue;
    }
    bool ok = true;
    double secs = 0;
    std::string detail;
    for (const auto* a : it->second) {
      ok = ok && a->passed;
      secs += a->seconds;
      detail += a->measured.dump();
    }
    line(c, ok, secs, detail.substr(0, 200));
  }

  // 12: the CLI report must match the in-process run byte for byte
  const fs::path dir = fs::temp_directory_path() / ("tws_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{\"seed\": " << seed << "}\n";
  const std::string cmd = std::string("TWS_THREADS=1 ") + TWS_CLI + " check all --config " + (dir / "c.json").string() +
                          " --out " + dir.string() + " > /dev/null 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string cli = slurp(dir / "check_all.json");
  const std::string mine = res.to_json().dump(2) + "\n";
  const bool same = !cli.empty() && cli == mine;
  line(12, same, secs,
       "{\"identical\":" + std::string(same ? "true" : "false") + ",\"bytes\":" + std::to_string(mine.size()) +
           ",\"cli_exit\":" + std::to_string(WIFEXITED(rc) ? WEXITSTATUS(rc) : -1) + "}");
  fs::remove_all(dir);

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
