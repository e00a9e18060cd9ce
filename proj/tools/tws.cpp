// tws: testing constants, property checks, corpus search and plot data.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tws/errors.hpp"
#include "tws/harness.hpp"

namespace fs = std::filesystem;
using namespace tws;

namespace {

// written whole at the end, so a failed run leaves no partial report
void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-weight testing constants for step and atomic weights"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  uint64_t seed = 0;
  bool verify = false;
  std::string which;

  std::vector<CLI::Option*> seed_opts;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (JSON)")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "master seed, overrides the config"));
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--verify-witness", verify, "re-evaluate every witness");
  };
  auto* constants = app.add_subcommand("constants", "every testing constant of the configured pair");
  auto* check = app.add_subcommand("check", "property suites; exit 1 on a failed hard assertion");
  auto* search = app.add_subcommand("search", "rank generated pairs by a ratio of constants");
  auto* plot = app.add_subcommand("plotdata", "CSV samples of one quantity");
  for (auto* s : {constants, check, search, plot}) common(s);
  check->add_option("suite", which, "measure|dyadic|operators|poisson|conditions|decomp|inequalities|all");
  search->add_option("target", which, "strengthened/ap|pivotal/dual|ap/testing");
  plot->add_option("quantity", which, "t_natural_profile|poisson_profile|superlevel_sets|condition_vs_scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!which.empty()) {
      if (app.got_subcommand(check)) cfg.suite = which;
      if (app.got_subcommand(search)) cfg.search.target = which;
      if (app.got_subcommand(plot)) cfg.plot["quantity"] = which;
    }
    for (auto* o : seed_opts)
      if (o->count()) cfg.reseed(seed);
    if (app.got_subcommand(check) && !is_suite(cfg.suite))
      throw ParseError("suite", "unknown suite '" + cfg.suite + "'");
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const fs::path out(out_dir);
  try {
    if (app.got_subcommand(constants)) {
      const json r = cmd_constants(cfg, verify);
      write_file(out / "constants.json", r.dump(2) + "\n");
      for (const auto& rep : r["reports"]) {
        // a doubling witness flagged infinite keeps its finite estimate in the report
        const bool inf = rep.contains("witness") && rep["witness"].value("infinite", false);
        std::printf("%-22s %s\n", rep["condition"].get<std::string>().c_str(),
                    inf ? "inf" : rep["estimate"].dump().c_str());
      }
      bool ok = r["chain_holds"].get<bool>();
      if (verify) ok = ok && r["verified"].get<bool>();
      std::printf("%s\n", ok ? "ok" : "FAILED");
      return ok ? 0 : 1;
    }
    if (app.got_subcommand(check)) {
      const auto res = run_check(cfg.suite, cfg.check_options(), [](const Assertion& a) {
        std::printf("%s %-12s %-26s %s\n", a.passed ? "pass" : (a.hard ? "FAIL" : "warn"), a.suite.c_str(),
                    a.name.c_str(), a.measured.dump().substr(0, 160).c_str());
        std::fflush(stdout);
      });
      write_file(out / ("check_" + cfg.suite + ".json"), res.to_json().dump(2) + "\n");
      return res.passed() ? 0 : 1;
    }
    if (app.got_subcommand(search)) {
      const json r = cmd_search(cfg, verify);
      write_file(out / "search.json", r.dump(2) + "\n");
      std::printf("%s over %d pairs: ratio in [%s, %s]\n", r["target"].get<std::string>().c_str(), cfg.search.count,
                  r["min_ratio"].dump().c_str(), r["max_ratio"].dump().c_str());
      bool ok = !r.contains("bound") || r["bound"]["holds"].get<bool>();
      if (verify) ok = ok && r["verified"].get<bool>();
      return ok ? 0 : 1;
    }
    const std::string q = cfg.plot.value("quantity", std::string("t_natural_profile"));
    const std::string csv = cmd_plotdata(cfg, q);
    std::string name = q;
    for (auto& ch : name)
      if (ch == ' ' || ch == '-' || ch == '/') ch = '_';
    write_file(out / (name + ".csv"), csv);
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
