#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "frontier/stats.hpp"

using namespace frontier;

TEST_CASE("normal quantile and cdf invert each other") {
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-6}) {
    const double x = stats::normal_quantile(p);
    CHECK(stats::normal_cdf(x) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS(stats::normal_quantile(0.0));
  CHECK_THROWS(stats::normal_quantile(1.0));
}

TEST_CASE("gamma_p against the erf special case") {
  // P(1/2, x) = erf(sqrt(x))
  for (double x : {0.01, 0.3, 1.0, 2.5, 9.0}) {
    CHECK(stats::gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  }
  // P(1, x) = 1 - exp(-x)
  for (double x : {0.1, 1.0, 4.0}) {
    CHECK(stats::gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  }
}

TEST_CASE("chi-squared quantile round trip and a classic table value") {
  CHECK(stats::chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-9));
  CHECK(stats::chi2_quantile(0.95, 2) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
  for (double dof : {1.0, 3.0, 10.0, 57.0}) {
    for (double p : {0.01, 0.5, 0.95, 0.999}) {
      const double x = stats::chi2_quantile(p, dof);
      CHECK(stats::chi2_cdf(x, dof) == doctest::Approx(p).epsilon(1e-8));
    }
  }
}

TEST_CASE("incomplete beta symmetry and F cdf consistency") {
  for (double a : {0.5, 2.0, 7.5}) {
    for (double b : {1.0, 3.5}) {
      for (double x : {0.1, 0.4, 0.9}) {
        CHECK(stats::inc_beta(a, b, x) ==
              doctest::Approx(1.0 - stats::inc_beta(b, a, 1.0 - x)).epsilon(1e-11));
      }
    }
  }
  // F(1, d) is the square of a t(d) variate: CDF relation through the beta.
  CHECK(stats::f_cdf(1.0, 5, 5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("noncentral chi-squared cdf against the dof=1 closed form") {
  // dof = 1: P(X <= x) = Phi(sqrt(x) - sqrt(nc)) - Phi(-sqrt(x) - sqrt(nc))
  for (double nc : {0.5, 2.0, 10.0}) {
    for (double x : {0.5, 2.0, 8.0, 20.0}) {
      const double expect = stats::normal_cdf(std::sqrt(x) - std::sqrt(nc)) -
                            stats::normal_cdf(-std::sqrt(x) - std::sqrt(nc));
      CHECK(stats::noncentral_chi2_cdf(x, 1, nc) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  // nc = 0 degenerates to the central cdf.
  CHECK(stats::noncentral_chi2_cdf(3.0, 4, 0.0) ==
        doctest::Approx(stats::chi2_cdf(3.0, 4)).epsilon(1e-12));
  CHECK(stats::noncentral_f_cdf(1.3, 5, 9, 0.0) ==
        doctest::Approx(stats::f_cdf(1.3, 5, 9)).epsilon(1e-10));
}

TEST_CASE("noncentral F cdf is a proper cdf and respects scaling bounds") {
  double prev = 0.0;
  for (double x = 0.1; x < 30.0; x += 0.5) {
    const double v = stats::noncentral_f_cdf(x, 9, 21, 12.0);
    CHECK(v >= prev - 1e-13);
    CHECK(v <= 1.0 + 1e-13);
    prev = v;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("kolmogorov survival function known values") {
  CHECK(stats::kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735).epsilon(1e-8));
  CHECK(stats::kolmogorov_sf(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-8));
  CHECK(stats::kolmogorov_sf(2.0) == doctest::Approx(0.000670923).epsilon(1e-4));
  CHECK(stats::kolmogorov_sf(8.0) == doctest::Approx(0.0));
}

TEST_CASE("one-sample KS statistic on a uniform grid is exactly 1/(2m)") {
  const std::size_t m = 100;
  std::vector<double> xs;
  for (std::size_t i = 0; i < m; ++i)
    xs.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(m));
  const double d = stats::ks_statistic(xs, [](double x) { return x; });
  CHECK(d == doctest::Approx(0.5 / static_cast<double>(m)).epsilon(1e-12));
}

TEST_CASE("two-sample KS statistic on disjoint samples is 1") {
  CHECK(stats::ks_statistic_two_sample({1.0, 2.0, 3.0}, {10.0, 11.0}) ==
        doctest::Approx(1.0));
  CHECK(stats::ks_statistic_two_sample({1.0, 2.0}, {1.0, 2.0}) == doctest::Approx(0.0));
}

TEST_CASE("KS accepts true-distribution samples and rejects a shifted one") {
  std::mt19937_64 eng(42);
  std::normal_distribution<double> nd;
  std::vector<double> xs(20000);
  for (auto& x : xs) x = nd(eng);
  const double d = stats::ks_statistic(xs, [](double x) { return stats::normal_cdf(x); });
  CHECK(stats::ks_p_value(d, xs.size()) > 0.01);
  for (auto& x : xs) x += 0.05;
  const double d2 = stats::ks_statistic(xs, [](double x) { return stats::normal_cdf(x); });
  CHECK(stats::ks_p_value(d2, xs.size()) < 1e-4);
}

TEST_CASE("QQ fit recovers location and scale") {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> nd(0.4, 1.7);
  std::vector<double> xs(50000);
  for (auto& x : xs) x = nd(eng);
  const auto fit = stats::qq_fit_normal(xs);
  CHECK(fit.slope == doctest::Approx(1.7).epsilon(0.02));
  CHECK(fit.intercept == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("moments of a tiny hand sample") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const auto m = stats::moments(xs);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.n == 4);
}
