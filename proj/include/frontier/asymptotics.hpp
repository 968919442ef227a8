#pragma once

#include <nlohmann/json_fwd.hpp>

#include "frontier/linalg.hpp"
#include "frontier/model.hpp"
#include "frontier/rng.hpp"

namespace frontier::asymp {

using linalg::Matrix;
using linalg::Vector;

/// Limit law of a sqrt(n-p)-scaled quantity: finite-n centering vector and
/// limit covariance.
struct AsymptoticLaw {
  Vector center;
  Matrix cov;

  nlohmann::json to_json() const;
};

/// The three frontier scalars at their population values, their
/// high-dimensional limits, and the drawn plug-in values.
struct LambdaPoint {
  double r = 0.0;
  double v = 0.0;
  double s = 0.0;
};

/// Limit of the plug-in scalars: (R, (1-c)V, (s+c)/(1-c)).
LambdaPoint lambda_limit(double r_gmv, double v_gmv, double s, double c);

/// Deterministic centerings of the five plug-in quantities at finite n.
struct Centering {
  double v_center = 0.0;  // (1-p/n)/(1-1/n) V
  double r_center = 0.0;  // R
  double s_center = 0.0;  // (s+p/n)(1-1/n)/(1-p/n+2/n)
  double eta_scale = 0.0; // s/(s+p/n)
};

Centering centering(double r_gmv, double v_gmv, double s, int n, int p);

/// Joint limit covariance of sqrt(n-p)(V, R, theta, s, eta), dimension 2k+3,
/// with the finite-n centerings in `center`.  The (s, eta) cross block is
/// assembled verbatim from its displayed formula; it is validated only
/// empirically (see the limit-draw cross-check).
AsymptoticLaw xi_matrix(double r_gmv, double v_gmv, double s, const Vector& theta,
                        const Vector& eta, const Matrix& lql, double mu_a_mu, int n,
                        int p);

/// Limit covariance of sqrt(n-p)(L w_hat_g - centering), dimension k.
AsymptoticLaw omega_lg(const model::PortfolioSpec& spec, double r_gmv, double v_gmv,
                       double s, const Vector& theta, const Vector& eta,
                       const Matrix& lql, int n, int p);

/// Closed form of omega_lg for the EU portfolio, used as a cross-check.
Matrix omega_lg_eu(double gamma, double v_gmv, double s, const Vector& eta,
                   const Matrix& lql, double c);

/// One entry of a characteristic vector: a portfolio and which of its six
/// characteristics to track.
struct CharacteristicItem {
  model::PortfolioSpec spec;
  int index = 0;  // 0..5: r_g, v_g, var_g, cvar_g, vor_g, cvor_g
};

/// Limit covariance of the estimated characteristics listed in `items`.
AsymptoticLaw xi_h(const std::vector<CharacteristicItem>& items, double r_gmv,
                   double v_gmv, double s, int n, int p);

/// Limit covariance of the bias-corrected weight estimator, centered at the
/// population L w_g.
AsymptoticLaw omega_lg_consistent(const model::PortfolioSpec& spec, double r_gmv,
                                  double v_gmv, double s, const Vector& theta,
                                  const Vector& eta, const Matrix& lql, double c);

/// Same substitution as omega_lg_consistent but with estimator inputs;
/// exposed so the plug-in covariance estimator shares the exact formula.
Matrix omega_gc_formula(const model::PortfolioSpec& spec, double r, double v, double s,
                        const Vector& eta, const Matrix& lql, double c);

AsymptoticLaw xi_h_consistent(const std::vector<CharacteristicItem>& items, double r_gmv,
                              double v_gmv, double s, double c);

/// Precomputed pieces for drawing directly from the joint limit law.
class LimitDrawContext {
 public:
  LimitDrawContext(double r_gmv, double v_gmv, double s, const Vector& eta,
                   const Matrix& lql, double mu_a_mu, double c);

  /// One draw of the 2k+3 limit vector, order (V, R, theta, s, eta),
  /// assembled literally from eight independent standard normal blocks.
  Vector operator()(rng::Engine& eng) const;

  int dim() const { return 2 * k_ + 3; }

 private:
  int k_;
  double v_, s_, c_, mu_a_mu_;
  double sqrt_v_;
  Vector eta_;
  Matrix sq_;            // (LQL' - s^2/(s+c) eta eta')^{1/2}
  Matrix lql_inv_sqrt_;
  Matrix mixed_;         // (LQL' - 2 s^2/(s+c) eta eta') (LQL')^{-1/2}
};

}  // namespace frontier::asymp
