#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace frontier::stats {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement step; |error| well below 1e-12 on (0,1)).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);

inline double chi2_cdf(double x, double dof) {
  return x <= 0.0 ? 0.0 : gamma_p(dof / 2.0, x / 2.0);
}

/// (1-beta) quantile of chi^2 with dof degrees of freedom.
double chi2_quantile(double p, double dof);

inline double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return inc_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

/// CDF of the noncentral chi^2 (Poisson mixture of central chi^2 terms).
double noncentral_chi2_cdf(double x, double dof, double nc);

/// CDF of the noncentral F distribution (Poisson mixture of incomplete betas).
double noncentral_f_cdf(double x, double d1, double d2, double nc);

/// One-sample Kolmogorov-Smirnov statistic of `sample` against `cdf`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

/// Survival function of the asymptotic Kolmogorov distribution, Q(lambda).
double kolmogorov_sf(double lambda);

/// Asymptotic one-sample KS p-value for sample size n.
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

/// Asymptotic two-sample critical value at level alpha.
inline double ks_two_sample_critical(double alpha, std::size_t n1, std::size_t n2) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n1 + n2) /
                       (static_cast<double>(n1) * static_cast<double>(n2)));
}

struct QqFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// OLS fit of sorted sample values against standard normal quantiles at
/// Blom plotting positions (i - 3/8) / (n + 1/4).
QqFit qq_fit_normal(std::vector<double> sample);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t n = 0;
  double standard_error() const { return std::sqrt(variance / static_cast<double>(n)); }
};

Moments moments(std::span<const double> xs);

}  // namespace frontier::stats
