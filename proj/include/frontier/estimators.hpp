#pragma once

#include <Eigen/Cholesky>

#include "frontier/model.hpp"

namespace frontier::est {

using linalg::Matrix;
using linalg::Vector;

/// Sample moments and the plug-in frontier quantities they induce.  The
/// plug-in path is the shared frontier_core routine, so the numbers agree
/// bitwise with frontier_quantities applied to (mu_hat, sigma_hat).
struct SampleEstimates {
  Vector mu_hat;
  Matrix sigma_hat;
  int n = 0;
  int p = 0;

  double v_hat = 0.0;
  double r_hat = 0.0;
  double s_hat = 0.0;
  Vector w_hat;
  Vector v_sf_hat;  // NaN when s_hat is numerically zero
  bool s_valid = false;

  /// Q_hat assembled on demand (p-by-p).
  Matrix q_hat() const;

  Vector theta_hat(const model::LinearCombination& lc) const { return lc.l * w_hat; }
  Vector eta_hat(const model::LinearCombination& lc) const { return lc.l * v_sf_hat; }
  /// L Sigma_hat^{-1} L' - theta_hat theta_hat' / v_hat.
  Matrix lql_hat(const model::LinearCombination& lc) const;

  Eigen::LLT<Matrix> llt;  // factor of sigma_hat, reused for solves
};

/// Rows are observations, columns assets.
SampleEstimates sample_estimates(const Matrix& returns);

/// How the de-biased slope is formed.  `verbatim` applies the reference
/// correction (n-p)/n (s_hat - p/(p+n)); `centering_exact` inverts the
/// deterministic finite-n centering of s_hat instead.  Both are exposed
/// because the two disagree at order O(1) in s.
enum class SlopeCorrection { verbatim, centering_exact };

struct ConsistentEstimates {
  int n = 0;
  int p = 0;
  double v_c = 0.0;
  double r_c = 0.0;
  double s_c = 0.0;
  Vector theta_c;
  Vector eta_c;   // NaN when s_c <= 0
  bool s_c_positive = false;

  Vector lw_c(const model::PortfolioSpec& spec) const;
  model::PortfolioCharacteristics characteristics_c(const model::PortfolioSpec& spec) const;
};

ConsistentEstimates consistent_estimates(const SampleEstimates& sample,
                                         const model::LinearCombination& lincomb,
                                         SlopeCorrection mode = SlopeCorrection::verbatim);

/// Plug-in estimate of the limit covariance of the de-biased weights:
/// the consistent-weight covariance formula evaluated at the de-biased
/// estimates and (1 - p/n) L Q_hat L', symmetrized with an eigenvalue floor.
Matrix omega_hat_plugin(const model::PortfolioSpec& spec, const ConsistentEstimates& cons,
                        const SampleEstimates& sample,
                        const model::LinearCombination& lincomb);

struct ConfidenceRegion {
  Vector center;
  Matrix shape;          // (n-p) * omega_hat^{-1}
  double level = 0.0;    // 1 - beta
  double chi2_quantile = 0.0;

  double statistic(const Vector& point) const;
  bool contains(const Vector& point) const { return statistic(point) <= chi2_quantile; }
};

ConfidenceRegion confidence_region(const model::PortfolioSpec& spec,
                                   const ConsistentEstimates& cons,
                                   const Matrix& omega_hat, double beta);

struct TestResult {
  bool reject = false;
  double statistic = 0.0;
  double quantile = 0.0;
};

/// Wald test of L w_g = r; shares its statistic with the confidence region,
/// so reject == !contains(r) holds identically.
TestResult test_weights(const model::PortfolioSpec& spec, const ConsistentEstimates& cons,
                        const Matrix& omega_hat, const Vector& r, double beta);

}  // namespace frontier::est
