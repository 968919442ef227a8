#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "frontier/errors.hpp"
#include "frontier/samplers.hpp"
#include "frontier/stats.hpp"

using namespace frontier;
using linalg::Matrix;
using linalg::Vector;

namespace {

model::PopulationModel random_model(int p, std::uint64_t seed) {
  rng::Engine eng = rng::substream(seed, 0);
  const Matrix u = linalg::haar_orthogonal(p, eng);
  Vector ev(p);
  for (int i = 0; i < p; ++i) ev(i) = rng::uniform(eng, 0.2, 5.0);
  Matrix sigma = u * ev.asDiagonal() * u.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  Vector mu(p);
  for (int i = 0; i < p; ++i) mu(i) = rng::uniform(eng, -0.2, 0.2);
  return model::PopulationModel::create(std::move(mu), std::move(sigma));
}

struct Setup {
  model::PopulationModel pop;
  model::FrontierQuantities frontier;
  model::LinearCombination lincomb;
  sample::SamplerInputs inputs;
};

Setup make_setup(int p, int n, std::uint64_t seed) {
  Setup s{random_model(p, seed), {}, model::LinearCombination::basis_rows({0}, p), {}};
  s.frontier = model::frontier_quantities(s.pop);
  s.inputs = sample::make_sampler_inputs(s.pop, s.frontier, s.lincomb, n);
  return s;
}

model::PortfolioSpec eu_spec() {
  model::PortfolioSpec spec;
  spec.kind = model::PortfolioKind::EU;
  spec.gamma = 20.0;
  return spec;
}

}  // namespace

TEST_CASE("exact marginals: variance and slope estimators at p=10, n=30") {
  const auto s = make_setup(10, 30, 21);
  const auto batch = sample::run_fast_batch(s.inputs, eu_spec(), 20000, 77);
  const int n = 30, p = 10;

  auto v = batch.column("v_hat");
  for (auto& x : v) x *= (n - 1.0) / s.frontier.v_gmv;
  const double dv = stats::ks_statistic(
      v, [&](double x) { return stats::chi2_cdf(x, n - p); });
  CHECK(stats::ks_p_value(dv, v.size()) > 0.01);

  auto sh = batch.column("s_hat");
  const double scale = n * (n - p + 1.0) / ((n - 1.0) * (p - 1.0));
  for (auto& x : sh) x *= scale;
  const double nc = n * s.frontier.s;
  const double ds = stats::ks_statistic(sh, [&](double x) {
    return stats::noncentral_f_cdf(x, p - 1.0, n - p + 1.0, nc);
  });
  CHECK(stats::ks_p_value(ds, sh.size()) > 0.01);
}

TEST_CASE("joint and characteristics representations share their marginals") {
  const auto s = make_setup(8, 40, 22);
  const auto spec = eu_spec();
  const auto batch = sample::run_fast_batch(s.inputs, spec, 8000, 5);

  std::vector<double> r2, v2, s2;
  rng::Engine eng = rng::substream(91, 0);
  for (int i = 0; i < 8000; ++i) {
    const auto d = sample::draw_characteristics(s.frontier.r_gmv, s.frontier.v_gmv,
                                                s.frontier.s, 40, 8, spec, eng);
    r2.push_back(d.r_hat);
    v2.push_back(d.v_hat);
    s2.push_back(d.s_hat);
  }
  const double crit = stats::ks_two_sample_critical(0.01, 8000, 8000);
  CHECK(stats::ks_statistic_two_sample(batch.column("r_hat"), r2) < crit);
  CHECK(stats::ks_statistic_two_sample(batch.column("v_hat"), v2) < crit);
  CHECK(stats::ks_statistic_two_sample(batch.column("s_hat"), s2) < crit);
}

TEST_CASE("GMV weight draw collapses to theta_hat bitwise") {
  const auto s = make_setup(6, 30, 23);
  model::PortfolioSpec gmv;
  gmv.kind = model::PortfolioKind::GMV;
  rng::Engine eng = rng::substream(3, 0);
  for (int i = 0; i < 200; ++i) {
    const auto joint = sample::draw_joint(s.inputs, eng);
    const auto w = sample::draw_weights(s.inputs, gmv, joint);
    REQUIRE(w.ok);
    CHECK((w.lw - joint.theta_hat).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("batches are deterministic in config plus seed") {
  const auto s = make_setup(5, 25, 24);
  const auto spec = eu_spec();
  const auto a = sample::run_fast_batch(s.inputs, spec, 500, 11);
  const auto b = sample::run_fast_batch(s.inputs, spec, 500, 11);
  std::ostringstream oa, ob;
  a.write_csv(oa);
  b.write_csv(ob);
  CHECK(oa.str() == ob.str());
  const auto c = sample::run_fast_batch(s.inputs, spec, 500, 12);
  std::ostringstream oc;
  c.write_csv(oc);
  CHECK(oa.str() != oc.str());

  const sample::BruteSampler brute(s.pop, s.lincomb, 25, spec,
                                   sample::Scenario::normal);
  const auto ba = sample::run_brute_batch(brute, spec, 200, 11);
  const auto bb = sample::run_brute_batch(brute, spec, 200, 11);
  std::ostringstream sa, sb;
  ba.write_csv(sa);
  bb.write_csv(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("moment oracles for the variance and slope estimators") {
  const int n = 50, p = 8;
  const auto s = make_setup(p, n, 25);
  const auto batch = sample::run_fast_batch(s.inputs, eu_spec(), 40000, 31);

  const auto mv = stats::moments(batch.column("v_hat"));
  const double ev = s.frontier.v_gmv * (n - p) / (n - 1.0);
  CHECK(std::abs(mv.mean - ev) < 4.0 * mv.standard_error());

  const auto ms = stats::moments(batch.column("s_hat"));
  const double d1 = p - 1.0, d2 = n - p + 1.0;
  const double f_mean = d2 / (d2 - 2.0) * (1.0 + n * s.frontier.s / d1);
  const double es = (n - 1.0) * d1 / (n * d2) * f_mean;
  CHECK(std::abs(ms.mean - es) < 4.0 * ms.standard_error());
}

TEST_CASE("fast batch performs zero matrix factorizations") {
  const auto s = make_setup(10, 60, 26);
  const auto before = linalg::factorization_count();
  (void)sample::run_fast_batch(s.inputs, eu_spec(), 3000, 17);
  CHECK(linalg::factorization_count() == before);
}

TEST_CASE("fast path matches the brute-force oracle at p=5, n=25") {
  const auto s = make_setup(5, 25, 27);
  const auto spec = eu_spec();
  const std::size_t b = 6000;
  const auto fast = sample::run_fast_batch(s.inputs, spec, b, 41);
  const sample::BruteSampler brute(s.pop, s.lincomb, 25, spec,
                                   sample::Scenario::normal);
  const auto slow = sample::run_brute_batch(brute, spec, b, 42);
  const double crit = stats::ks_two_sample_critical(0.01, b, b);
  for (const char* col : {"v_hat", "r_hat", "s_hat"}) {
    CAPTURE(col);
    CHECK(stats::ks_statistic_two_sample(fast.column(col), slow.column(col)) < crit);
  }
  for (const char* col : {"theta_hat", "eta_hat", "lw_hat"}) {
    CAPTURE(col);
    CHECK(stats::ks_statistic_two_sample(fast.column(col, 0), slow.column(col, 0)) <
          crit);
  }
}

TEST_CASE("per-draw characteristics satisfy the closed-form identities") {
  const auto s = make_setup(7, 35, 28);
  const auto spec = eu_spec();
  const auto batch = sample::run_fast_batch(s.inputs, spec, 2000, 51);
  const auto r_g = batch.column("r_g");
  const auto v_g = batch.column("v_g");
  const auto var_g = batch.column("var_g");
  const auto vor_g = batch.column("vor_g");
  const auto cvar_g = batch.column("cvar_g");
  const auto cvor_g = batch.column("cvor_g");
  const auto r_hat = batch.column("r_hat");
  const auto v_hat = batch.column("v_hat");
  const auto s_hat = batch.column("s_hat");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.domain_violation[i]) continue;
    const double g = s_hat[i] / spec.gamma;
    CHECK(r_g[i] == doctest::Approx(r_hat[i] + g).epsilon(1e-12));
    CHECK(v_g[i] == doctest::Approx(v_hat[i] + g * g / s_hat[i]).epsilon(1e-12));
    CHECK(vor_g[i] == doctest::Approx(var_g[i] + 2.0 * r_g[i]).epsilon(1e-10));
    CHECK(cvor_g[i] == doctest::Approx(cvar_g[i] + 2.0 * r_g[i]).epsilon(1e-10));
  }
}

TEST_CASE("sampler inputs are internally consistent") {
  const auto s = make_setup(9, 45, 29);
  CHECK(s.inputs.dof3 == 9 - 1 - 1);
  CHECK(s.inputs.mu_a_mu >= 0.0);
  CHECK(s.inputs.mu_a_mu <= s.inputs.s + 1e-12);
  CHECK(s.inputs.noncentrality == doctest::Approx(45.0 * s.inputs.mu_a_mu));
  const Matrix prod = s.inputs.lql_sqrt * s.inputs.lql_inv_sqrt;
  CHECK((prod - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(
      sample::make_sampler_inputs(s.pop, s.frontier, s.lincomb, 9),
      InsufficientSample);
}

TEST_CASE("batches with mostly infeasible portfolios throw DomainError") {
  const auto s = make_setup(6, 30, 30);
  model::PortfolioSpec bad;
  bad.kind = model::PortfolioKind::MVoR;
  bad.v0 = 0.0;  // discriminant is negative at nearly every draw
  CHECK_THROWS_AS(sample::run_fast_batch(s.inputs, bad, 500, 61), DomainError);
}

TEST_CASE("heavy-tailed brute scenario runs and flags no representation") {
  const auto s = make_setup(5, 40, 31);
  const auto spec = eu_spec();
  const sample::BruteSampler brute(s.pop, s.lincomb, 40, spec,
                                   sample::Scenario::student_t, 10);
  const auto batch = sample::run_brute_batch(brute, spec, 300, 71);
  CHECK(batch.size() == 300);
  CHECK(batch.provenance == sample::Provenance::brute_force);
  for (double x : batch.column("v_hat")) CHECK(std::isfinite(x));
  CHECK_THROWS_AS(sample::BruteSampler(s.pop, s.lincomb, 40, spec,
                                       sample::Scenario::student_t, 2),
                  ConfigError);
}
