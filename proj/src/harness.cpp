#include "frontier/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

namespace frontier::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(std::filesystem::path(dir) / name);
  if (!os) throw Error("cannot open output file: " + name);
  os.imbue(std::locale::classic());
  os.precision(17);
  return os;
}

bool wants(const ExperimentConfig& cfg, const std::string& sink) {
  return std::find(cfg.outputs.begin(), cfg.outputs.end(), sink) != cfg.outputs.end();
}

}  // namespace

int ExperimentConfig::p() const { return static_cast<int>(std::lround(c * n)); }

void ExperimentConfig::validate() const {
  if (c <= 0.0 || c >= 1.0) throw ConfigError("config: c outside (0,1)");
  const int pp = p();
  if (pp < 2) throw ConfigError("config: p = round(c*n) must be at least 2");
  if (n <= pp) throw ConfigError("config: need n > p");
  if (b_draws < 1) throw ConfigError("config: b_draws must be positive");
  if (scenario == sample::Scenario::student_t && t_dof <= 2)
    throw ConfigError("config: student_t scenario needs t_dof > 2");
  double total = 0.0;
  for (const auto& e : eigen_spec) {
    if (e.proportion < 0.0 || e.value <= 0.0)
      throw ConfigError("config: invalid eigen_spec entry");
    total += e.proportion;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("config: eigen_spec proportions must sum to 1");
  if (lincomb_rows.empty()) throw ConfigError("config: empty lincomb");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("config: beta outside (0,1)");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("scenario")) {
    const auto s = j.at("scenario").get<std::string>();
    if (s == "normal") cfg.scenario = sample::Scenario::normal;
    else if (s == "student_t") cfg.scenario = sample::Scenario::student_t;
    else throw ConfigError("config: unknown scenario " + s);
  }
  cfg.t_dof = j.value("t_dof", cfg.t_dof);
  cfg.n = j.value("n", cfg.n);
  cfg.c = j.value("c", cfg.c);
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("lincomb")) cfg.lincomb_rows = j.at("lincomb").get<std::vector<int>>();
  cfg.b_draws = j.value("b_draws", cfg.b_draws);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("eigen_spec")) {
    cfg.eigen_spec.clear();
    for (const auto& e : j.at("eigen_spec"))
      cfg.eigen_spec.push_back({e.at("proportion").get<double>(), e.at("value").get<double>()});
  }
  cfg.portfolio.kind = model::PortfolioKind::EU;
  cfg.portfolio.gamma = cfg.gamma;
  if (j.contains("portfolio")) {
    const auto& pj = j.at("portfolio");
    if (pj.contains("kind"))
      cfg.portfolio.kind = model::portfolio_kind_from_string(pj.at("kind").get<std::string>());
    cfg.portfolio.gamma = pj.value("gamma", cfg.portfolio.gamma);
    cfg.portfolio.mu0 = pj.value("mu0", cfg.portfolio.mu0);
    cfg.portfolio.rf = pj.value("rf", cfg.portfolio.rf);
    cfg.portfolio.alpha = pj.value("alpha", cfg.portfolio.alpha);
    cfg.portfolio.v0 = pj.value("v0", cfg.portfolio.v0);
    cfg.portfolio.k0 = pj.value("k0", cfg.portfolio.k0);
    if (pj.contains("sign_convention")) {
      const auto sc = pj.at("sign_convention").get<std::string>();
      if (sc == "table1_verbatim")
        cfg.portfolio.sign_convention = model::MvSignConvention::table1_verbatim;
      else if (sc == "return_consistent")
        cfg.portfolio.sign_convention = model::MvSignConvention::return_consistent;
      else
        throw ConfigError("config: unknown sign_convention " + sc);
    }
  }
  cfg.beta = j.value("beta", cfg.beta);
  if (j.contains("outputs")) cfg.outputs = j.at("outputs").get<std::vector<std::string>>();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: schema error: ") + e.what());
  }
}

model::PopulationModel build_scenario(const ExperimentConfig& config, rng::Engine& eng) {
  const int p = config.p();
  // Largest-remainder apportionment of the eigenvalue counts.
  std::vector<int> counts(config.eigen_spec.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < config.eigen_spec.size(); ++i) {
    const double exact = config.eigen_spec[i].proportion * p;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int r = 0; r < p - assigned; ++r) counts[remainders[r % remainders.size()].second]++;

  Vector eigenvalues(p);
  int pos = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (int j = 0; j < counts[i]; ++j) eigenvalues(pos++) = config.eigen_spec[i].value;

  const Matrix u = linalg::haar_orthogonal(p, eng);
  Matrix sigma = u * eigenvalues.asDiagonal() * u.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  Vector mu(p);
  for (int i = 0; i < p; ++i) mu(i) = rng::uniform(eng, -0.2, 0.2);
  return model::PopulationModel::create(std::move(mu), std::move(sigma));
}

nlohmann::json DiagnosticsReport::to_json() const {
  nlohmann::json j;
  j["representation_valid"] = representation_valid;
  j["runtime_seconds"] = runtime_seconds;
  j["fast_path_seconds"] = fast_path_seconds;
  j["brute_force_seconds"] = brute_force_seconds;
  auto arr = nlohmann::json::array();
  for (const auto& q : quantities) {
    nlohmann::json r;
    r["name"] = q.name;
    r["ks_statistic_vs_asymptotic"] = q.ks_vs_asymptotic;
    r["ks_p_value"] = q.ks_p_value;
    r["ks_statistic_vs_oracle"] = q.ks_vs_oracle;
    r["qq_slope"] = q.qq_slope;
    r["qq_intercept"] = q.qq_intercept;
    r["mean_bias"] = q.mean_bias;
    r["mean_bias_se"] = q.mean_bias_se;
    r["variance_ratio"] = q.variance_ratio;
    r["domain_violation_rate"] = q.domain_violation_rate;
    arr.push_back(r);
  }
  j["quantities"] = arr;
  return j;
}

const QuantityRecord& DiagnosticsReport::find(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q;
  throw Error("DiagnosticsReport: no quantity named " + name);
}

namespace {

struct TrackedQuantity {
  std::string name;
  std::string column;
  int coord = 0;
  double center = 0.0;
  double sd = 0.0;
};

std::vector<TrackedQuantity> tracked_quantities(const sample::SamplerInputs& in,
                                                const asymp::AsymptoticLaw& xi,
                                                const asymp::AsymptoticLaw& omega) {
  const int k = in.k;
  std::vector<TrackedQuantity> out;
  auto push = [&](std::string name, std::string column, int coord, int law_index,
                  const asymp::AsymptoticLaw& law) {
    out.push_back({std::move(name), std::move(column), coord, law.center(law_index),
                   std::sqrt(law.cov(law_index, law_index))});
  };
  push("v_hat", "v_hat", 0, 0, xi);
  push("r_hat", "r_hat", 0, 1, xi);
  for (int j = 0; j < k; ++j)
    push("theta_hat_" + std::to_string(j + 1), "theta_hat", j, 2 + j, xi);
  push("s_hat", "s_hat", 0, 2 + k, xi);
  for (int j = 0; j < k; ++j)
    push("eta_hat_" + std::to_string(j + 1), "eta_hat", j, 3 + k + j, xi);
  for (int j = 0; j < k; ++j)
    push("lw_hat_" + std::to_string(j + 1), "lw_hat", j, j, omega);
  return out;
}

std::vector<double> standardized_column(const sample::DrawBatch& batch,
                                        const TrackedQuantity& q, double scale) {
  std::vector<double> xs = batch.column(q.column, q.coord);
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs)
    if (std::isfinite(x)) out.push_back((x - q.center) * scale / q.sd);
  return out;
}

}  // namespace

DiagnosticsReport run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                 bool with_oracle) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const int n = config.n;
  const int p = config.p();
  const double scale = std::sqrt(static_cast<double>(n - p));

  rng::Engine model_eng = rng::substream(config.seed, 0);
  const model::PopulationModel pop = build_scenario(config, model_eng);
  const model::FrontierQuantities frontier = model::frontier_quantities(pop);
  const model::LinearCombination lincomb =
      model::LinearCombination::basis_rows(config.lincomb_rows, p);
  const sample::SamplerInputs inputs =
      sample::make_sampler_inputs(pop, frontier, lincomb, n);

  const asymp::AsymptoticLaw xi =
      asymp::xi_matrix(inputs.r_gmv, inputs.v_gmv, inputs.s, inputs.theta, inputs.eta,
                       inputs.lql, inputs.mu_a_mu, n, p);
  const asymp::AsymptoticLaw omega =
      asymp::omega_lg(config.portfolio, inputs.r_gmv, inputs.v_gmv, inputs.s,
                      inputs.theta, inputs.eta, inputs.lql, n, p);

  DiagnosticsReport report;
  report.representation_valid = config.scenario == sample::Scenario::normal;

  sample::DrawBatch fast_batch, brute_batch;
  bool have_fast = false, have_brute = false;
  if (config.scenario == sample::Scenario::normal) {
    const auto t0 = std::chrono::steady_clock::now();
    fast_batch = sample::run_fast_batch(inputs, config.portfolio, config.b_draws,
                                        config.seed + 1);
    report.fast_path_seconds = seconds_since(t0);
    have_fast = true;
  }
  if (config.scenario == sample::Scenario::student_t || with_oracle) {
    const sample::BruteSampler brute(pop, lincomb, n, config.portfolio, config.scenario,
                                     config.t_dof);
    const auto t0 = std::chrono::steady_clock::now();
    brute_batch = sample::run_brute_batch(brute, config.portfolio, config.b_draws,
                                          config.seed + 2);
    report.brute_force_seconds = seconds_since(t0);
    have_brute = true;
  }
  const sample::DrawBatch& primary = have_fast ? fast_batch : brute_batch;

  const auto tracked = tracked_quantities(inputs, xi, omega);
  std::vector<std::pair<std::string, std::vector<double>>> standardized;
  for (const auto& q : tracked) {
    QuantityRecord rec;
    rec.name = q.name;
    rec.domain_violation_rate = primary.violation_rate();
    std::vector<double> z = standardized_column(primary, q, scale);
    const auto m = stats::moments(z);
    rec.mean_bias = m.mean;
    rec.mean_bias_se = m.standard_error();
    rec.variance_ratio = m.variance;
    rec.ks_vs_asymptotic =
        stats::ks_statistic(z, [](double x) { return stats::normal_cdf(x); });
    rec.ks_p_value = stats::ks_p_value(rec.ks_vs_asymptotic, z.size());
    const auto fit = stats::qq_fit_normal(z);
    rec.qq_slope = fit.slope;
    rec.qq_intercept = fit.intercept;
    if (have_fast && have_brute) {
      rec.ks_vs_oracle = stats::ks_statistic_two_sample(
          standardized_column(fast_batch, q, scale),
          standardized_column(brute_batch, q, scale));
    } else {
      rec.ks_vs_oracle = kNaN;
    }
    standardized.push_back({q.name, std::move(z)});
    report.quantities.push_back(std::move(rec));
  }

  if (!out_dir.empty()) {
    if (wants(config, "draws")) {
      if (have_fast) {
        auto os = open_output(out_dir, "draws_fast.csv");
        fast_batch.write_csv(os);
      }
      if (have_brute) {
        auto os = open_output(out_dir, "draws_brute.csv");
        brute_batch.write_csv(os);
      }
    }
    if (wants(config, "law")) {
      auto os = open_output(out_dir, "law_joint.json");
      os << xi.to_json().dump(2) << "\n";
      auto os2 = open_output(out_dir, "law_weights.json");
      os2 << omega.to_json().dump(2) << "\n";
    }
    if (wants(config, "qq"))
      emit_qq(standardized, (std::filesystem::path(out_dir) / "qq.csv").string());
    if (wants(config, "report")) {
      auto os = open_output(out_dir, "report.json");
      os << report.to_json().dump(2) << "\n";
    }
  }
  report.runtime_seconds = seconds_since(t_start);
  return report;
}

CoverageRow run_coverage(const ExperimentConfig& config, int reps,
                         const std::string& out_dir, est::SlopeCorrection mode) {
  config.validate();
  if (config.scenario != sample::Scenario::normal)
    throw ConfigError("run_coverage: only the normal scenario is supported");
  if (reps < 1) throw ConfigError("run_coverage: reps must be positive");
  const int n = config.n;
  const int p = config.p();

  rng::Engine model_eng = rng::substream(config.seed, 0);
  const model::PopulationModel pop = build_scenario(config, model_eng);
  const model::FrontierQuantities frontier = model::frontier_quantities(pop);
  const model::LinearCombination lincomb =
      model::LinearCombination::basis_rows(config.lincomb_rows, p);

  const double g_pop = model::g_value(config.portfolio, frontier.r_gmv, frontier.v_gmv,
                                      frontier.s);
  const Vector theta = lincomb.l * frontier.w_gmv;
  const Vector eta = lincomb.l * frontier.v_sf;
  const Vector truth = theta + g_pop * eta;

  Matrix lql = lincomb.l * frontier.q * lincomb.l.transpose();
  lql = 0.5 * (lql + lql.transpose());
  const asymp::AsymptoticLaw limit = asymp::omega_lg_consistent(
      config.portfolio, frontier.r_gmv, frontier.v_gmv, frontier.s, theta, eta, lql,
      static_cast<double>(p) / n);
  const Vector sd =
      (limit.cov.diagonal() / static_cast<double>(n - p)).cwiseSqrt();

  linalg::note_factorization();
  Eigen::LLT<Matrix> llt(pop.sigma);
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("run_coverage: covariance factorization failed");
  const Matrix chol = llt.matrixL();

  int covered = 0, rejected_null = 0, rejected_1sd = 0, rejected_5sd = 0;
  bool duality_ok = true;
  for (int rep = 0; rep < reps; ++rep) {
    rng::Engine eng = rng::substream(config.seed + 0x10000, rep);
    Matrix z(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) z(i, j) = rng::standard_normal(eng);
    Matrix x = z * chol.transpose();
    x.rowwise() += pop.mu.transpose();

    const est::SampleEstimates se = est::sample_estimates(x);
    const est::ConsistentEstimates cons = est::consistent_estimates(se, lincomb, mode);
    const Matrix omega_hat =
        est::omega_hat_plugin(config.portfolio, cons, se, lincomb);
    const est::ConfidenceRegion region =
        est::confidence_region(config.portfolio, cons, omega_hat, config.beta);
    const est::TestResult at_truth =
        est::test_weights(config.portfolio, cons, omega_hat, truth, config.beta);
    if (region.contains(truth)) ++covered;
    if (at_truth.reject) ++rejected_null;
    if (at_truth.reject == region.contains(truth)) duality_ok = false;
    if (est::test_weights(config.portfolio, cons, omega_hat, truth + sd, config.beta)
            .reject)
      ++rejected_1sd;
    if (est::test_weights(config.portfolio, cons, omega_hat, truth + 5.0 * sd,
                          config.beta)
            .reject)
      ++rejected_5sd;
  }

  CoverageRow row;
  row.portfolio = model::to_string(config.portfolio.kind);
  row.reps = reps;
  row.coverage = static_cast<double>(covered) / reps;
  row.size = static_cast<double>(rejected_null) / reps;
  row.power_1sd = static_cast<double>(rejected_1sd) / reps;
  row.power_5sd = static_cast<double>(rejected_5sd) / reps;
  row.duality_ok = duality_ok;

  if (!out_dir.empty()) {
    auto os = open_output(out_dir, "coverage.csv");
    os << "portfolio, reps, coverage, size, power_1sd, power_5sd, duality_ok\n";
    os << row.portfolio << ", " << row.reps << ", " << row.coverage << ", " << row.size
       << ", " << row.power_1sd << ", " << row.power_5sd << ", "
       << (row.duality_ok ? 1 : 0) << "\n";
  }
  return row;
}

void emit_qq(const std::vector<std::pair<std::string, std::vector<double>>>& standardized,
             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("emit_qq: cannot open " + path);
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "quantity, order_index, empirical_quantile_standardized, "
        "theoretical_normal_quantile\n";
  for (const auto& [name, values] : standardized) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto b = sorted.size();
    for (std::size_t i = 0; i < b; ++i) {
      const double pos =
          (static_cast<double>(i) + 1.0 - 0.375) / (static_cast<double>(b) + 0.25);
      os << name << ", " << i << ", " << sorted[i] << ", " << stats::normal_quantile(pos)
         << "\n";
    }
  }
}

}  // namespace frontier::harness
