#include "frontier/estimators.hpp"

#include <cmath>
#include <limits>

#include "frontier/asymptotics.hpp"
#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

namespace frontier::est {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Matrix SampleEstimates::q_hat() const {
  const Matrix sigma_inv = llt.solve(Matrix::Identity(p, p));
  const Vector si_one = llt.solve(Vector::Ones(p));
  return sigma_inv - si_one * si_one.transpose() * v_hat;
}

Matrix SampleEstimates::lql_hat(const model::LinearCombination& lc) const {
  const Matrix si_lt = llt.solve(lc.l.transpose());
  const Vector th = theta_hat(lc);
  Matrix out = lc.l * si_lt - th * th.transpose() / v_hat;
  return 0.5 * (out + out.transpose());
}

SampleEstimates sample_estimates(const Matrix& returns) {
  const int n = static_cast<int>(returns.rows());
  const int p = static_cast<int>(returns.cols());
  if (n <= p + 2) throw InsufficientSample("sample_estimates: need n > p + 2");
  if (!returns.allFinite())
    throw ConfigError("sample_estimates: non-finite entries in returns");

  SampleEstimates out;
  out.n = n;
  out.p = p;
  out.mu_hat = returns.colwise().mean();
  const Matrix centered = returns.rowwise() - out.mu_hat.transpose();
  Matrix sigma = Matrix::Zero(p, p);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / (n - 1.0));
  out.sigma_hat = sigma.selfadjointView<Eigen::Lower>();

  linalg::note_factorization();
  out.llt.compute(out.sigma_hat);
  if (out.llt.info() != Eigen::Success)
    throw SingularSampleCovariance("sample_estimates: sample covariance is singular");
  // LLT can succeed on barely-PD input; reject if the factor's diagonal
  // indicates effective rank deficiency.
  const Vector diag = Matrix(out.llt.matrixL()).diagonal();
  if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff()))
    throw SingularSampleCovariance("sample_estimates: sample covariance is singular");

  const model::FrontierCore core = model::frontier_core(out.mu_hat, out.llt);
  out.v_hat = core.v_gmv;
  out.r_hat = core.r_gmv;
  out.s_hat = core.s;
  out.s_valid = core.s_valid;
  out.w_hat = core.sigma_inv_one * core.v_gmv;
  out.v_sf_hat =
      core.s_valid ? Vector(core.q_mu / core.s) : Vector::Constant(p, kNaN);
  return out;
}

Vector ConsistentEstimates::lw_c(const model::PortfolioSpec& spec) const {
  if (spec.kind == model::PortfolioKind::GMV) return theta_c;
  if (!s_c_positive) return Vector::Constant(theta_c.size(), kNaN);
  const double g = model::g_value(spec, r_c, v_c, s_c);
  return theta_c + g * eta_c;
}

model::PortfolioCharacteristics ConsistentEstimates::characteristics_c(
    const model::PortfolioSpec& spec) const {
  return model::characteristics(spec, r_c, v_c, s_c);
}

ConsistentEstimates consistent_estimates(const SampleEstimates& sample,
                                         const model::LinearCombination& lincomb,
                                         SlopeCorrection mode) {
  const int n = sample.n;
  const int p = sample.p;
  const double cn = static_cast<double>(p) / n;
  if (cn >= 1.0) throw InsufficientSample("consistent_estimates: p/n must be below 1");

  ConsistentEstimates out;
  out.n = n;
  out.p = p;
  out.v_c = sample.v_hat / (1.0 - cn);
  out.r_c = sample.r_hat;
  out.theta_c = sample.theta_hat(lincomb);
  if (mode == SlopeCorrection::verbatim) {
    out.s_c = (n - p) / static_cast<double>(n) *
              (sample.s_hat - p / static_cast<double>(p + n));
  } else {
    // Exact inverse of the deterministic finite-n centering of s_hat.
    out.s_c = sample.s_hat * (1.0 - cn + 2.0 / n) / (1.0 - 1.0 / n) - cn;
  }
  out.s_c_positive = out.s_c > 0.0;
  if (out.s_c_positive && sample.s_valid) {
    out.eta_c = (out.s_c + cn) / out.s_c * sample.eta_hat(lincomb);
  } else {
    out.eta_c = Vector::Constant(lincomb.k, kNaN);
  }
  return out;
}

Matrix omega_hat_plugin(const model::PortfolioSpec& spec, const ConsistentEstimates& cons,
                        const SampleEstimates& sample,
                        const model::LinearCombination& lincomb) {
  if (!cons.s_c_positive)
    throw NonpositiveSlopeEstimate("omega_hat_plugin: s_c is not positive");
  const double cn = static_cast<double>(sample.p) / sample.n;
  const Matrix lql_est = (1.0 - cn) * sample.lql_hat(lincomb);
  Matrix omega = asymp::omega_gc_formula(spec, cons.r_c, cons.v_c, cons.s_c, cons.eta_c,
                                         lql_est, cn);
  omega = 0.5 * (omega + omega.transpose());
  linalg::note_factorization();
  Eigen::SelfAdjointEigenSolver<Matrix> es(omega);
  if (es.info() != Eigen::Success)
    throw SingularOmega("omega_hat_plugin: eigendecomposition failed");
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const Vector floored = es.eigenvalues().cwiseMax(1e-12 * lmax);
  return es.eigenvectors() * floored.asDiagonal() * es.eigenvectors().transpose();
}

double ConfidenceRegion::statistic(const Vector& point) const {
  const Vector d = center - point;
  return d.dot(shape * d);
}

ConfidenceRegion confidence_region(const model::PortfolioSpec& spec,
                                   const ConsistentEstimates& cons,
                                   const Matrix& omega_hat, double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("confidence_region: beta outside (0,1)");
  const int k = static_cast<int>(omega_hat.rows());
  ConfidenceRegion region;
  region.center = cons.lw_c(spec);
  if (!region.center.allFinite())
    throw NonpositiveSlopeEstimate("confidence_region: de-biased weights undefined");
  Eigen::LLT<Matrix> llt(omega_hat);
  linalg::note_factorization();
  if (llt.info() != Eigen::Success)
    throw SingularOmega("confidence_region: omega_hat is not positive definite");
  region.shape = (cons.n - cons.p) * llt.solve(Matrix::Identity(k, k));
  region.level = 1.0 - beta;
  region.chi2_quantile = stats::chi2_quantile(1.0 - beta, k);
  return region;
}

TestResult test_weights(const model::PortfolioSpec& spec, const ConsistentEstimates& cons,
                        const Matrix& omega_hat, const Vector& r, double beta) {
  const ConfidenceRegion region = confidence_region(spec, cons, omega_hat, beta);
  TestResult out;
  out.statistic = region.statistic(r);
  out.quantile = region.chi2_quantile;
  out.reject = !(out.statistic <= out.quantile);
  return out;
}

}  // namespace frontier::est
