#include "frontier/stats.hpp"

#include <cmath>
#include <numeric>

namespace frontier::stats {

namespace {

// Acklam's coefficients for the rational approximation of Phi^{-1}.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Lower incomplete gamma by series expansion, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by Lentz continued fraction, valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double inc_beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 1000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
        ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
        (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
        ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double gamma_p(double a, double x) {
  if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double inc_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("inc_beta: parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * inc_beta_cf(a, b, x) / a;
  return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p outside (0,1)");
  // Wilson-Hilferty start, then Newton on the CDF.
  const double z = normal_quantile(p);
  const double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
  double x = dof * t * t * t;
  if (x <= 0.0) x = 0.5 * dof;
  for (int it = 0; it < 100; ++it) {
    const double f = chi2_cdf(x, dof) - p;
    const double pdf = std::exp((0.5 * dof - 1.0) * std::log(x) - 0.5 * x -
                                0.5 * dof * std::log(2.0) - std::lgamma(0.5 * dof));
    if (pdf <= 0.0) break;
    const double step = f / pdf;
    x -= step;
    if (x <= 0.0) x = 1e-12;
    if (std::abs(step) < 1e-12 * (1.0 + x)) break;
  }
  return x;
}

double noncentral_chi2_cdf(double x, double dof, double nc) {
  if (x <= 0.0) return 0.0;
  if (nc < 1e-14) return chi2_cdf(x, dof);
  // Poisson-weighted sum of central chi^2 CDFs, starting at the modal index.
  const double half = 0.5 * nc;
  const int j0 = static_cast<int>(half);
  double lw = -half + j0 * std::log(half) - std::lgamma(j0 + 1.0);
  double sum = 0.0;
  double w = std::exp(lw);
  // Walk up from the mode.
  double wj = w;
  for (int j = j0; j < j0 + 10000; ++j) {
    const double term = wj * chi2_cdf(x, dof + 2.0 * j);
    sum += term;
    if (term < 1e-16 * (sum + 1e-300) && j > j0 + 2) break;
    wj *= half / (j + 1.0);
  }
  // Walk down from the mode.
  wj = w;
  for (int j = j0 - 1; j >= 0; --j) {
    wj *= (j + 1.0) / half;
    const double term = wj * chi2_cdf(x, dof + 2.0 * j);
    sum += term;
    if (term < 1e-16 * (sum + 1e-300)) break;
  }
  return std::min(sum, 1.0);
}

double noncentral_f_cdf(double x, double d1, double d2, double nc) {
  if (x <= 0.0) return 0.0;
  if (nc < 1e-14) return f_cdf(x, d1, d2);
  const double y = d1 * x / (d1 * x + d2);
  const double half = 0.5 * nc;
  const int j0 = static_cast<int>(half);
  double w = std::exp(-half + j0 * std::log(half) - std::lgamma(j0 + 1.0));
  double sum = 0.0;
  double wj = w;
  for (int j = j0; j < j0 + 10000; ++j) {
    const double term = wj * inc_beta(0.5 * d1 + j, 0.5 * d2, y);
    sum += term;
    if (term < 1e-16 * (sum + 1e-300) && j > j0 + 2) break;
    wj *= half / (j + 1.0);
  }
  wj = w;
  for (int j = j0 - 1; j >= 0; --j) {
    wj *= (j + 1.0) / half;
    const double term = wj * inc_beta(0.5 * d1 + j, 0.5 * d2, y);
    sum += term;
    if (term < 1e-16 * (sum + 1e-300)) break;
  }
  return std::min(sum, 1.0);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

QqFit qq_fit_normal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const auto n = sample.size();
  if (n < 2) throw std::invalid_argument("qq_fit_normal: need at least 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Blom plotting positions.
    const double pos = (static_cast<double>(i) + 1.0 - 0.375) / (static_cast<double>(n) + 0.25);
    const double x = normal_quantile(pos);
    const double y = sample[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  QqFit fit;
  fit.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / dn;
  return fit;
}

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.variance = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
  return m;
}

}  // namespace frontier::stats
