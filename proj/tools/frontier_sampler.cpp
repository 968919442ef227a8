#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <nlohmann/json.hpp>

#include "frontier/errors.hpp"
#include "frontier/harness.hpp"

namespace {

using frontier::harness::ExperimentConfig;

void print_report(const frontier::harness::DiagnosticsReport& report) {
  std::cout << report.to_json().dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch sampler and diagnostics for optimal-portfolio estimators"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  bool with_oracle = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int reps = 1000;

  auto add_common = [&](CLI::App* sub, bool need_reps) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    if (need_reps) sub->add_option("--reps", reps, "number of replications")->required();
  };

  CLI::App* run = app.add_subcommand("run", "draw batches and write diagnostics");
  add_common(run, false);
  run->add_flag("--oracle", with_oracle, "also draw a brute-force oracle batch");

  CLI::App* coverage =
      app.add_subcommand("coverage", "confidence-region coverage and test size");
  add_common(coverage, true);

  CLI::App* qq = app.add_subcommand("qq", "QQ data for the standardized quantities");
  add_common(qq, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (run->parsed()) {
      print_report(frontier::harness::run_experiment(cfg, out_dir, with_oracle));
    } else if (coverage->parsed()) {
      const auto row = frontier::harness::run_coverage(cfg, reps, out_dir);
      std::cout << "portfolio=" << row.portfolio << " reps=" << row.reps
                << " coverage=" << row.coverage << " size=" << row.size
                << " power_1sd=" << row.power_1sd << " power_5sd=" << row.power_5sd
                << " duality_ok=" << (row.duality_ok ? 1 : 0) << "\n";
    } else {
      cfg.outputs = {"qq"};
      frontier::harness::run_experiment(cfg, out_dir, false);
      std::cout << "wrote qq.csv to " << out_dir << "\n";
    }
  } catch (const frontier::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const frontier::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
