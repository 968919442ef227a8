#pragma once

#include <Eigen/Cholesky>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "frontier/linalg.hpp"

namespace frontier::model {

using linalg::Matrix;
using linalg::Vector;

/// Mean vector and covariance matrix of the p asset returns.  Validated at
/// construction: sigma symmetric, positive definite, p >= 2.
struct PopulationModel {
  Vector mu;
  Matrix sigma;
  int p = 0;

  static PopulationModel create(Vector mu, Matrix sigma);

  nlohmann::json to_json() const;
  static PopulationModel from_json(const nlohmann::json& j);
};

/// The five quantities that pin down the efficient frontier, plus the
/// projection matrix Q.  When the slope s is numerically zero the
/// self-financing direction is undefined; v_sf is NaN and s_valid is false.
struct FrontierQuantities {
  double v_gmv = 0.0;
  Vector w_gmv;
  double r_gmv = 0.0;
  double s = 0.0;
  Vector v_sf;
  Matrix q;
  bool s_valid = false;
};

/// Slim variant used in per-draw hot paths: no p-by-p outputs.
struct FrontierCore {
  double v_gmv = 0.0;
  double r_gmv = 0.0;
  double s = 0.0;
  Vector sigma_inv_one;  // Sigma^{-1} 1
  Vector q_mu;           // Q mu
  bool s_valid = false;
};

/// Frontier scalars and solve vectors from an existing Cholesky factor of
/// the covariance matrix.  Shared by the population path, the plug-in
/// estimator path and the brute-force sampler so that all three produce
/// bitwise-identical numbers for identical inputs.
FrontierCore frontier_core(const Vector& mu, const Eigen::LLT<Matrix>& llt);

FrontierQuantities frontier_quantities(const PopulationModel& model);

enum class PortfolioKind { GMV, MV, EU, T, SR, MVaR, MCVaR, MVoR, MCVoR };

/// The MV row of the portfolio family admits two sign conventions; the
/// default makes the portfolio's expected return equal the target mu0.
enum class MvSignConvention { table1_verbatim, return_consistent };

struct PortfolioSpec {
  PortfolioKind kind = PortfolioKind::GMV;
  double gamma = 20.0;   // EU risk aversion
  double mu0 = 0.0;      // MV target return
  double rf = 0.0;       // T risk-free rate
  double alpha = 0.95;   // VaR level, in (0.5, 1)
  double v0 = 0.01;      // MVoR target
  double k0 = 0.01;      // MCVoR target
  MvSignConvention sign_convention = MvSignConvention::return_consistent;

  double z_alpha() const;
  /// exp(-z_alpha^2/2) / (2 pi (1-alpha)), as specified.
  double k_alpha() const;
};

PortfolioKind portfolio_kind_from_string(const std::string& name);
std::string to_string(PortfolioKind kind);

double g_value(const PortfolioSpec& spec, double r_gmv, double v_gmv, double s);

struct GGradient {
  double g1 = 0.0;  // d/dR
  double g2 = 0.0;  // d/dV
  double g3 = 0.0;  // d/ds
};

GGradient g_gradient(const PortfolioSpec& spec, double r_gmv, double v_gmv, double s);

struct PortfolioCharacteristics {
  double r_g = 0.0;
  double v_g = 0.0;
  double var_g = 0.0;
  double cvar_g = 0.0;
  double vor_g = 0.0;
  double cvor_g = 0.0;
};

PortfolioCharacteristics characteristics(const PortfolioSpec& spec, double r_gmv,
                                         double v_gmv, double s);

/// Gradients of the six characteristics with respect to (R, V, s), rows in
/// the order (r_g, v_g, var_g, cvar_g, vor_g, cvor_g).
Eigen::Matrix<double, 6, 3> characteristic_gradients(const PortfolioSpec& spec,
                                                     double r_gmv, double v_gmv, double s);

Vector weights(const PortfolioSpec& spec, const PopulationModel& model,
               const FrontierQuantities& frontier);

/// k-by-p selection matrix for linear combinations of weights, k < p-1.
struct LinearCombination {
  Matrix l;
  int k = 0;

  static LinearCombination create(Matrix l);
  /// Rows of the identity: L picks individual weights.
  static LinearCombination basis_rows(const std::vector<int>& rows, int p);
  /// Checks rank(M) = k+2 for the stacked matrix M = (L^T, mu, 1)^T.
  void check_stacked_rank(const Vector& mu) const;
};

}  // namespace frontier::model
