#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lrl/experiment.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& out_flag, bool strict) {
  lrl::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return 2;
    }
    cfg = lrl::parse_run_config(lrl::json::parse(in));
  } catch (const std::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return 2;
  }
  if (!out_flag.empty()) cfg.out = out_flag;

  lrl::Game game;
  try {
    game = lrl::build_game(cfg.game_spec);
  } catch (const std::exception& e) {
    std::cerr << "error: bad game spec: " << e.what() << "\n";
    return 2;
  }

  lrl::ExperimentResult res;
  try {
    res = lrl::run_experiment(cfg, game);
  } catch (const lrl::RunAborted& e) {
    std::cerr << "error: run aborted: " << e.what() << "\n";
    return 3;
  } catch (const lrl::SolverError& e) {
    std::cerr << "error: solver failed: " << e.what()
              << " (last decrement " << e.last_decrement() << ")\n";
    return 3;
  }

  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open output " << cfg.out << "\n";
      return 2;
    }
    lrl::write_csv(res.trace, out);
  } else {
    lrl::write_csv(res.trace, std::cout);
  }
  lrl::write_summary(res, std::cout);

  if (strict && !res.trace.violations.empty()) return 1;
  return 0;
}

int do_validate(const std::string& config_path) {
  lrl::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return 2;
    }
    cfg = lrl::parse_run_config(lrl::json::parse(in));
  } catch (const std::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return 2;
  }
  const auto report = lrl::validate_config(cfg);
  for (const auto& line : report) std::cout << line << "\n";
  if (report.empty()) std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-play experiment runner for lifted log-regularized optimistic FTRL"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  bool strict = false;

  auto* run = app.add_subcommand("run", "Run self-play and emit a CSV regret trace");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--out", out_path, "CSV output path (default: config's `out`, else stdout)");
  run->add_flag("--strict", strict, "Exit nonzero if any runtime invariant fails");

  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  validate->add_option("--config", config_path, "Run configuration (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("run")) return do_run(config_path, out_path, strict);
  return do_validate(config_path);
}
