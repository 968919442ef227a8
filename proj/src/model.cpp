#include "frontier/model.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

namespace frontier::model {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSlopeEps = 1e-14;
}  // namespace

PopulationModel PopulationModel::create(Vector mu, Matrix sigma) {
  const auto p = mu.size();
  if (p < 2) throw ConfigError("PopulationModel: p must be at least 2");
  if (sigma.rows() != p || sigma.cols() != p)
    throw ConfigError("PopulationModel: sigma dimension mismatch");
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw ConfigError("PopulationModel: sigma is not symmetric");
  linalg::note_factorization();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("PopulationModel: eigendecomposition failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-12 * lmax))
    throw SingularCovariance("PopulationModel: sigma is not positive definite");
  PopulationModel m;
  m.mu = std::move(mu);
  m.sigma = std::move(sigma);
  m.p = static_cast<int>(p);
  return m;
}

nlohmann::json PopulationModel::to_json() const {
  nlohmann::json j;
  j["mu"] = std::vector<double>(mu.data(), mu.data() + mu.size());
  auto rows = nlohmann::json::array();
  for (int i = 0; i < p; ++i)
    rows.push_back(std::vector<double>(sigma.row(i).begin(), sigma.row(i).end()));
  j["sigma"] = rows;
  return j;
}

PopulationModel PopulationModel::from_json(const nlohmann::json& j) {
  const auto mu_list = j.at("mu").get<std::vector<double>>();
  const auto p = static_cast<int>(mu_list.size());
  Vector mu = Eigen::Map<const Vector>(mu_list.data(), p);
  Matrix sigma(p, p);
  const auto& rows = j.at("sigma");
  if (static_cast<int>(rows.size()) != p)
    throw ConfigError("PopulationModel: sigma row count mismatch");
  for (int i = 0; i < p; ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != p)
      throw ConfigError("PopulationModel: sigma column count mismatch");
    sigma.row(i) = Eigen::Map<const Vector>(row.data(), p);
  }
  return create(std::move(mu), std::move(sigma));
}

FrontierCore frontier_core(const Vector& mu, const Eigen::LLT<Matrix>& llt) {
  FrontierCore out;
  const auto p = mu.size();
  const Vector ones = Vector::Ones(p);
  out.sigma_inv_one = llt.solve(ones);
  const Vector sigma_inv_mu = llt.solve(mu);
  const double one_si_one = ones.dot(out.sigma_inv_one);
  out.v_gmv = 1.0 / one_si_one;
  const double one_si_mu = ones.dot(sigma_inv_mu);
  out.r_gmv = one_si_mu * out.v_gmv;
  out.q_mu = sigma_inv_mu - out.sigma_inv_one * (one_si_mu * out.v_gmv);
  out.s = mu.dot(out.q_mu);
  out.s_valid = out.s > kSlopeEps;
  return out;
}

FrontierQuantities frontier_quantities(const PopulationModel& model) {
  linalg::note_factorization();
  Eigen::LLT<Matrix> llt(model.sigma);
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("frontier_quantities: covariance factorization failed");
  const FrontierCore core = frontier_core(model.mu, llt);

  FrontierQuantities out;
  out.v_gmv = core.v_gmv;
  out.r_gmv = core.r_gmv;
  out.s = core.s;
  out.s_valid = core.s_valid;
  out.w_gmv = core.sigma_inv_one * core.v_gmv;
  const Matrix sigma_inv = llt.solve(Matrix::Identity(model.p, model.p));
  out.q = sigma_inv - core.sigma_inv_one * core.sigma_inv_one.transpose() * core.v_gmv;
  if (out.s_valid) {
    out.v_sf = core.q_mu / core.s;
  } else {
    out.v_sf = Vector::Constant(model.p, kNaN);
  }
  return out;
}

double PortfolioSpec::z_alpha() const { return stats::normal_quantile(alpha); }

double PortfolioSpec::k_alpha() const {
  const double z = z_alpha();
  return std::exp(-0.5 * z * z) / (2.0 * M_PI * (1.0 - alpha));
}

PortfolioKind portfolio_kind_from_string(const std::string& name) {
  if (name == "GMV") return PortfolioKind::GMV;
  if (name == "MV") return PortfolioKind::MV;
  if (name == "EU") return PortfolioKind::EU;
  if (name == "T") return PortfolioKind::T;
  if (name == "SR") return PortfolioKind::SR;
  if (name == "MVaR") return PortfolioKind::MVaR;
  if (name == "MCVaR") return PortfolioKind::MCVaR;
  if (name == "MVoR") return PortfolioKind::MVoR;
  if (name == "MCVoR") return PortfolioKind::MCVoR;
  throw ConfigError("unknown portfolio kind: " + name);
}

std::string to_string(PortfolioKind kind) {
  switch (kind) {
    case PortfolioKind::GMV: return "GMV";
    case PortfolioKind::MV: return "MV";
    case PortfolioKind::EU: return "EU";
    case PortfolioKind::T: return "T";
    case PortfolioKind::SR: return "SR";
    case PortfolioKind::MVaR: return "MVaR";
    case PortfolioKind::MCVaR: return "MCVaR";
    case PortfolioKind::MVoR: return "MVoR";
    case PortfolioKind::MCVoR: return "MCVoR";
  }
  return "?";
}

namespace {

double value_at_risk_g(double quantile_const, double r, double v, double s,
                       const char* label) {
  // Shared body of the MVaR/MCVaR rows: s * sqrt(V / (q^2 - s)).
  const double denom = quantile_const * quantile_const - s;
  if (denom <= 0.0)
    throw DomainError(std::string(label) + ": squared quantile constant <= s");
  (void)r;
  return s * std::sqrt(v / denom);
}

double value_of_return_g(double quantile_const, double target, double r, double v,
                         double s, const char* label) {
  const double z2 = quantile_const * quantile_const;
  const double denom = z2 - s;
  if (denom <= 0.0)
    throw DomainError(std::string(label) + ": squared quantile constant <= s");
  const double a = r + target;
  const double rad = z2 * s * (a * a + (s - z2) * v);
  if (rad < 0.0) throw DomainError(std::string(label) + ": negative discriminant");
  return (a * s + std::sqrt(rad)) / denom;
}

}  // namespace

double g_value(const PortfolioSpec& spec, double r, double v, double s) {
  switch (spec.kind) {
    case PortfolioKind::GMV:
      return 0.0;
    case PortfolioKind::MV:
      return spec.sign_convention == MvSignConvention::return_consistent ? spec.mu0 - r
                                                                         : r - spec.mu0;
    case PortfolioKind::EU:
      return s / spec.gamma;
    case PortfolioKind::T: {
      const double d = r - spec.rf;
      if (std::abs(d) < 1e-14) throw DomainError("T: R_GMV equals r_f");
      return v * s / d;
    }
    case PortfolioKind::SR: {
      if (std::abs(r) < 1e-14) throw DomainError("SR: R_GMV is zero");
      return v * s / r;
    }
    case PortfolioKind::MVaR:
      return value_at_risk_g(spec.z_alpha(), r, v, s, "MVaR");
    case PortfolioKind::MCVaR:
      return value_at_risk_g(spec.k_alpha(), r, v, s, "MCVaR");
    case PortfolioKind::MVoR:
      return value_of_return_g(spec.z_alpha(), spec.v0, r, v, s, "MVoR");
    case PortfolioKind::MCVoR:
      return value_of_return_g(spec.k_alpha(), spec.k0, r, v, s, "MCVoR");
  }
  throw DomainError("g_value: unreachable portfolio kind");
}

namespace {

GGradient var_gradient(double qc, double v, double s, const char* label) {
  const double denom = qc * qc - s;
  if (denom <= 0.0)
    throw DomainError(std::string(label) + ": squared quantile constant <= s");
  GGradient g;
  g.g1 = 0.0;
  g.g2 = s / (2.0 * std::sqrt(v * denom));
  g.g3 = std::sqrt(v) * (qc * qc - 0.5 * s) / std::pow(denom, 1.5);
  return g;
}

GGradient vor_gradient(double qc, double target, double r, double v, double s,
                       const char* label) {
  const double z2 = qc * qc;
  const double denom = z2 - s;
  if (denom <= 0.0)
    throw DomainError(std::string(label) + ": squared quantile constant <= s");
  const double a = r + target;
  const double t = z2 * s * (a * a - denom * v);
  if (t <= 0.0) throw DomainError(std::string(label) + ": nonpositive discriminant");
  const double sqrt_t = std::sqrt(t);
  GGradient g;
  g.g1 = (s + z2 * s * a / sqrt_t) / denom;
  g.g2 = z2 * s * (s - z2) / (2.0 * sqrt_t * denom);
  const double t_prime = z2 * (a * a - denom * v) + z2 * s * v;
  g.g3 = (a + t_prime / (2.0 * sqrt_t)) / denom + (a * s + sqrt_t) / (denom * denom);
  return g;
}

}  // namespace

GGradient g_gradient(const PortfolioSpec& spec, double r, double v, double s) {
  GGradient g;
  switch (spec.kind) {
    case PortfolioKind::GMV:
      return g;
    case PortfolioKind::MV:
      g.g1 = spec.sign_convention == MvSignConvention::return_consistent ? -1.0 : 1.0;
      return g;
    case PortfolioKind::EU:
      g.g3 = 1.0 / spec.gamma;
      return g;
    case PortfolioKind::T: {
      const double d = r - spec.rf;
      if (std::abs(d) < 1e-14) throw DomainError("T: R_GMV equals r_f");
      g.g1 = -v * s / (d * d);
      g.g2 = s / d;
      g.g3 = v / d;
      return g;
    }
    case PortfolioKind::SR: {
      if (std::abs(r) < 1e-14) throw DomainError("SR: R_GMV is zero");
      g.g1 = -v * s / (r * r);
      g.g2 = s / r;
      g.g3 = v / r;
      return g;
    }
    case PortfolioKind::MVaR:
      return var_gradient(spec.z_alpha(), v, s, "MVaR");
    case PortfolioKind::MCVaR:
      return var_gradient(spec.k_alpha(), v, s, "MCVaR");
    case PortfolioKind::MVoR:
      return vor_gradient(spec.z_alpha(), spec.v0, r, v, s, "MVoR");
    case PortfolioKind::MCVoR:
      return vor_gradient(spec.k_alpha(), spec.k0, r, v, s, "MCVoR");
  }
  throw DomainError("g_gradient: unreachable portfolio kind");
}

PortfolioCharacteristics characteristics(const PortfolioSpec& spec, double r, double v,
                                         double s) {
  const bool gmv = spec.kind == PortfolioKind::GMV;
  if (!gmv && s <= kSlopeEps)
    throw DegenerateSlope("characteristics: slope is zero for a non-GMV portfolio");
  const double g = g_value(spec, r, v, s);
  PortfolioCharacteristics out;
  out.r_g = r + g;
  out.v_g = gmv ? v : v + g * g / s;
  const double z = spec.z_alpha();
  const double k = spec.k_alpha();
  const double sd = std::sqrt(out.v_g);
  out.var_g = -out.r_g - z * sd;
  out.cvar_g = -out.r_g - k * sd;
  out.vor_g = out.r_g - z * sd;
  out.cvor_g = out.r_g - k * sd;
  return out;
}

Eigen::Matrix<double, 6, 3> characteristic_gradients(const PortfolioSpec& spec, double r,
                                                     double v, double s) {
  const bool gmv = spec.kind == PortfolioKind::GMV;
  if (!gmv && s <= kSlopeEps)
    throw DegenerateSlope("characteristic_gradients: slope is zero");
  const double g = g_value(spec, r, v, s);
  const GGradient gg = g_gradient(spec, r, v, s);

  Eigen::Vector3d dr_g(1.0 + gg.g1, gg.g2, gg.g3);
  Eigen::Vector3d dv_g;
  if (gmv) {
    dv_g << 0.0, 1.0, 0.0;
  } else {
    dv_g << 2.0 * g * gg.g1 / s, 1.0 + 2.0 * g * gg.g2 / s,
        (2.0 * g * gg.g3 * s - g * g) / (s * s);
  }
  const double v_g = gmv ? v : v + g * g / s;
  const Eigen::Vector3d dsd = dv_g / (2.0 * std::sqrt(v_g));
  const double z = spec.z_alpha();
  const double k = spec.k_alpha();

  Eigen::Matrix<double, 6, 3> out;
  out.row(0) = dr_g;
  out.row(1) = dv_g;
  out.row(2) = -dr_g - z * dsd;
  out.row(3) = -dr_g - k * dsd;
  out.row(4) = dr_g - z * dsd;
  out.row(5) = dr_g - k * dsd;
  return out;
}

Vector weights(const PortfolioSpec& spec, const PopulationModel& model,
               const FrontierQuantities& frontier) {
  if (spec.kind == PortfolioKind::GMV) return frontier.w_gmv;
  if (!frontier.s_valid)
    throw DegenerateSlope("weights: slope is zero for a non-GMV portfolio");
  (void)model;
  const double g = g_value(spec, frontier.r_gmv, frontier.v_gmv, frontier.s);
  return frontier.w_gmv + g * frontier.v_sf;
}

LinearCombination LinearCombination::create(Matrix l) {
  LinearCombination lc;
  lc.k = static_cast<int>(l.rows());
  const auto p = l.cols();
  if (lc.k < 1 || lc.k >= p - 1)
    throw ConfigError("LinearCombination: need 1 <= k < p-1");
  linalg::note_factorization();
  Eigen::JacobiSVD<Matrix> svd(l);
  const auto& sv = svd.singularValues();
  if (!(sv(lc.k - 1) > 1e-10 * sv(0)))
    throw ConfigError("LinearCombination: L is rank deficient");
  lc.l = std::move(l);
  return lc;
}

LinearCombination LinearCombination::basis_rows(const std::vector<int>& rows, int p) {
  Matrix l = Matrix::Zero(static_cast<int>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= p)
      throw ConfigError("LinearCombination: basis row out of range");
    l(static_cast<int>(i), rows[i]) = 1.0;
  }
  return create(std::move(l));
}

void LinearCombination::check_stacked_rank(const Vector& mu) const {
  const auto p = l.cols();
  Matrix m(k + 2, p);
  m.topRows(k) = l;
  m.row(k) = mu.transpose();
  m.row(k + 1) = Vector::Ones(p).transpose();
  linalg::note_factorization();
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (!(sv(k + 1) > 1e-10 * sv(0)))
    throw ConfigError("LinearCombination: stacked matrix (L', mu, 1)' is rank deficient");
}

}  // namespace frontier::model
