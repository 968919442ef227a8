#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "frontier/asymptotics.hpp"
#include "frontier/estimators.hpp"
#include "frontier/samplers.hpp"

namespace frontier::harness {

using linalg::Matrix;
using linalg::Vector;

struct EigenSpecEntry {
  double proportion = 0.0;
  double value = 0.0;
};

struct ExperimentConfig {
  sample::Scenario scenario = sample::Scenario::normal;
  int t_dof = 10;
  int n = 1000;
  double c = 0.5;
  double gamma = 20.0;
  std::vector<int> lincomb_rows = {0};  // rows of the identity forming L
  std::size_t b_draws = 5000;
  std::uint64_t seed = 1;
  std::vector<EigenSpecEntry> eigen_spec = {{0.2, 0.2}, {0.4, 1.0}, {0.4, 5.0}};
  model::PortfolioSpec portfolio;
  double beta = 0.05;
  std::vector<std::string> outputs = {"draws", "report", "law", "qq"};

  int p() const;  // round(c * n)
  void validate() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

/// Sigma with the configured eigenvalue multiset and Haar eigenvectors;
/// mu i.i.d. uniform on (-0.2, 0.2).  Drawn once per experiment.
model::PopulationModel build_scenario(const ExperimentConfig& config, rng::Engine& eng);

struct QuantityRecord {
  std::string name;
  double ks_vs_asymptotic = 0.0;
  double ks_p_value = 0.0;
  double ks_vs_oracle = 0.0;       // NaN when no oracle batch was drawn
  double qq_slope = 0.0;
  double qq_intercept = 0.0;
  double mean_bias = 0.0;          // mean of the standardized draws
  double mean_bias_se = 0.0;
  double variance_ratio = 0.0;     // variance of the standardized draws
  double domain_violation_rate = 0.0;
};

struct DiagnosticsReport {
  std::vector<QuantityRecord> quantities;
  bool representation_valid = true;  // false when only brute force is exact
  double runtime_seconds = 0.0;
  double fast_path_seconds = 0.0;
  double brute_force_seconds = 0.0;

  nlohmann::json to_json() const;
  const QuantityRecord& find(const std::string& name) const;
};

/// Runs one experiment: draws batches, standardizes each tracked quantity by
/// its limit law, computes KS/QQ diagnostics and (optionally) writes CSV and
/// JSON artifacts under out_dir ("" disables file output).
DiagnosticsReport run_experiment(const ExperimentConfig& config,
                                 const std::string& out_dir = "",
                                 bool with_oracle = false);

struct CoverageRow {
  std::string portfolio;
  int reps = 0;
  double coverage = 0.0;    // empirical coverage of the true L w_g
  double size = 0.0;        // rejection rate at the true value
  double power_1sd = 0.0;   // rejection rate one asymptotic SD off
  double power_5sd = 0.0;
  bool duality_ok = true;   // reject == !contains in every replication
};

CoverageRow run_coverage(const ExperimentConfig& config, int reps,
                         const std::string& out_dir = "",
                         est::SlopeCorrection mode = est::SlopeCorrection::verbatim);

/// QQ data for the standardized draws of every tracked quantity.
void emit_qq(const std::vector<std::pair<std::string, std::vector<double>>>& standardized,
             const std::string& path);

}  // namespace frontier::harness
