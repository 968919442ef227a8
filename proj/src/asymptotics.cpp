#include "frontier/asymptotics.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "frontier/errors.hpp"
#include "frontier/samplers.hpp"

namespace frontier::asymp {

nlohmann::json AsymptoticLaw::to_json() const {
  nlohmann::json j;
  j["center"] = std::vector<double>(center.data(), center.data() + center.size());
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    rows.push_back(std::vector<double>(cov.row(i).begin(), cov.row(i).end()));
  j["cov"] = rows;
  j["scale"] = "sqrt(n-p)";
  return j;
}

LambdaPoint lambda_limit(double r_gmv, double v_gmv, double s, double c) {
  if (c <= 0.0 || c >= 1.0) throw DomainError("lambda_limit: c outside (0,1)");
  return {r_gmv, (1.0 - c) * v_gmv, (s + c) / (1.0 - c)};
}

Centering centering(double r_gmv, double v_gmv, double s, int n, int p) {
  const double cn = static_cast<double>(p) / n;
  Centering out;
  out.v_center = (1.0 - cn) / (1.0 - 1.0 / n) * v_gmv;
  out.r_center = r_gmv;
  out.s_center = (s + cn) * (1.0 - 1.0 / n) / (1.0 - cn + 2.0 / n);
  out.eta_scale = s / (s + cn);
  return out;
}

namespace {

double xi_ss(double s, double c) {
  return 2.0 * (c + 2.0 * s) / (1.0 - c) +
         2.0 * (s + c) * (s + c) / ((1.0 - c) * (1.0 - c));
}

void check_c(double c, const char* where) {
  if (c <= 0.0 || c >= 1.0) throw DomainError(std::string(where) + ": c outside (0,1)");
}

}  // namespace

AsymptoticLaw xi_matrix(double r_gmv, double v_gmv, double s, const Vector& theta,
                        const Vector& eta, const Matrix& lql, double mu_a_mu, int n,
                        int p) {
  const double c = static_cast<double>(p) / n;
  check_c(c, "xi_matrix");
  const int k = static_cast<int>(theta.size());
  const int dim = 2 * k + 3;
  const int iv = 0, ir = 1, it = 2, is = 2 + k, ie = 3 + k;

  AsymptoticLaw law;
  law.center = Vector::Zero(dim);
  const Centering cen = centering(r_gmv, v_gmv, s, n, p);
  law.center(iv) = cen.v_center;
  law.center(ir) = cen.r_center;
  law.center.segment(it, k) = theta;
  law.center(is) = cen.s_center;
  law.center.segment(ie, k) = cen.eta_scale * eta;

  Matrix xi = Matrix::Zero(dim, dim);
  xi(iv, iv) = 2.0 * v_gmv * v_gmv * (1.0 - c) * (1.0 - c);
  xi(ir, ir) = v_gmv * (1.0 + s);
  xi.block(ir, it, 1, k) = v_gmv * s * eta.transpose();
  xi.block(it, ir, k, 1) = v_gmv * s * eta;
  xi.block(it, it, k, k) = v_gmv * lql;
  xi(is, is) = xi_ss(s, c);
  const Vector xi_s_eta =
      2.0 * s * (2.0 * c - s + 4.0 * mu_a_mu) / ((s + c) * (s + c)) * eta;
  xi.block(is, ie, 1, k) = xi_s_eta.transpose();
  xi.block(ie, is, k, 1) = xi_s_eta;
  const double sc2 = (s + c) * (s + c);
  xi.block(ie, ie, k, k) =
      (s + 1.0) / sc2 * lql -
      s * s * (2.0 * c * (1.0 - c) + sc2) / (sc2 * sc2) * eta * eta.transpose();
  law.cov = xi;
  return law;
}

AsymptoticLaw omega_lg(const model::PortfolioSpec& spec, double r_gmv, double v_gmv,
                       double s, const Vector& theta, const Vector& eta,
                       const Matrix& lql, int n, int p) {
  const double cn = static_cast<double>(p) / n;
  check_c(cn, "omega_lg");
  const double c = cn;
  const LambdaPoint lam = lambda_limit(r_gmv, v_gmv, s, c);
  const double g = model::g_value(spec, lam.r, lam.v, lam.s);
  const model::GGradient gr = model::g_gradient(spec, lam.r, lam.v, lam.s);
  const double v = v_gmv;
  const double sc = s + c;
  const double omc = 1.0 - c;

  const double lql_coef = (omc / sc + g) * g / sc + v;
  const double br = gr.g3 / omc - g / sc;
  const double eta_coef =
      s * s *
      (2.0 * omc * omc * v * v / (sc * sc) * gr.g2 + br * br * 2.0 * omc * c / (sc * sc) +
       4.0 * omc / (sc * sc) * (g * br + s * br * br) +
       v * omc / (sc * sc) * gr.g1 * gr.g1 + v / sc * gr.g1 +
       2.0 / omc * gr.g3 * gr.g3 - g * g / (sc * sc));

  AsymptoticLaw law;
  law.center = theta + s * g / (s + cn) * eta;
  law.cov = lql_coef * lql + eta_coef * eta * eta.transpose();
  return law;
}

Matrix omega_lg_eu(double gamma, double v_gmv, double s, const Vector& eta,
                   const Matrix& lql, double c) {
  check_c(c, "omega_lg_eu");
  const double sc = s + c;
  const double omc = 1.0 - c;
  const double gi = 1.0 / gamma;
  const double lql_coef = (omc / sc + gi * sc / omc) * gi / omc + v_gmv;
  const double eta_coef = (1.0 - 2.0 * c) * gi * gi * s * s / (omc * omc);
  return lql_coef * lql + eta_coef * eta * eta.transpose();
}

AsymptoticLaw xi_h(const std::vector<CharacteristicItem>& items, double r_gmv,
                   double v_gmv, double s, int n, int p) {
  const double c = static_cast<double>(p) / n;
  check_c(c, "xi_h");
  const LambdaPoint lam = lambda_limit(r_gmv, v_gmv, s, c);
  // Diagonal limit covariance of (R, V, s).
  const Eigen::Vector3d xi_rvs(v_gmv * (1.0 + s),
                               2.0 * v_gmv * v_gmv * (1.0 - c) * (1.0 - c), xi_ss(s, c));
  const auto q = static_cast<int>(items.size());
  AsymptoticLaw law;
  law.center = Vector::Zero(q);
  Matrix grads(q, 3);
  for (int i = 0; i < q; ++i) {
    const auto& item = items[i];
    const auto ch = model::characteristics(item.spec, lam.r, lam.v, lam.s);
    const double values[6] = {ch.r_g, ch.v_g, ch.var_g, ch.cvar_g, ch.vor_g, ch.cvor_g};
    law.center(i) = values[item.index];
    grads.row(i) =
        model::characteristic_gradients(item.spec, lam.r, lam.v, lam.s).row(item.index);
  }
  law.cov = grads * xi_rvs.asDiagonal() * grads.transpose();
  return law;
}

Matrix omega_gc_formula(const model::PortfolioSpec& spec, double r, double v, double s,
                        const Vector& eta, const Matrix& lql, double c) {
  check_c(c, "omega_gc_formula");
  if (s <= 0.0) throw DegenerateSlope("omega_gc_formula: slope must be positive");
  const double g = model::g_value(spec, r, v, s);
  const model::GGradient gr = model::g_gradient(spec, r, v, s);
  const double sc = s + c;
  const double omc = 1.0 - c;

  const double lql_coef = (omc / sc + sc / s * g) * g / s + v;
  const double br = gr.g3 * sc / s - g / s;
  const double eta_coef =
      s * s *
      (2.0 * omc * v * v / (s * sc) * gr.g2 + br * br * 2.0 * omc * c / (sc * sc) +
       4.0 * omc / (sc * sc) * (sc / s * g * br + s * br * br) +
       v * omc / (s * s) * gr.g1 * gr.g1 + v / s * gr.g1 +
       2.0 * omc * sc * sc / (s * s) * gr.g3 * gr.g3 - g * g / (s * s));
  return lql_coef * lql + eta_coef * eta * eta.transpose();
}

AsymptoticLaw omega_lg_consistent(const model::PortfolioSpec& spec, double r_gmv,
                                  double v_gmv, double s, const Vector& theta,
                                  const Vector& eta, const Matrix& lql, double c) {
  AsymptoticLaw law;
  const double g = model::g_value(spec, r_gmv, v_gmv, s);
  law.center = theta + g * eta;
  law.cov = omega_gc_formula(spec, r_gmv, v_gmv, s, eta, lql, c);
  return law;
}

AsymptoticLaw xi_h_consistent(const std::vector<CharacteristicItem>& items, double r_gmv,
                              double v_gmv, double s, double c) {
  check_c(c, "xi_h_consistent");
  const Eigen::Vector3d coef(v_gmv * (1.0 + s), 2.0 * v_gmv * v_gmv,
                             2.0 * s * s + 4.0 * s + 2.0 * c);
  const auto q = static_cast<int>(items.size());
  AsymptoticLaw law;
  law.center = Vector::Zero(q);
  Matrix grads(q, 3);
  for (int i = 0; i < q; ++i) {
    const auto& item = items[i];
    const auto ch = model::characteristics(item.spec, r_gmv, v_gmv, s);
    const double values[6] = {ch.r_g, ch.v_g, ch.var_g, ch.cvar_g, ch.vor_g, ch.cvor_g};
    law.center(i) = values[item.index];
    grads.row(i) =
        model::characteristic_gradients(item.spec, r_gmv, v_gmv, s).row(item.index);
  }
  law.cov = grads * coef.asDiagonal() * grads.transpose();
  return law;
}

LimitDrawContext::LimitDrawContext(double r_gmv, double v_gmv, double s,
                                   const Vector& eta, const Matrix& lql, double mu_a_mu,
                                   double c)
    : k_(static_cast<int>(eta.size())), v_(v_gmv), s_(s), c_(c), mu_a_mu_(mu_a_mu),
      sqrt_v_(std::sqrt(v_gmv)), eta_(eta) {
  (void)r_gmv;
  check_c(c, "LimitDrawContext");
  const double sc = s + c;
  const Matrix downdated = lql - s * s / sc * eta * eta.transpose();
  sq_ = linalg::sym_sqrt(downdated).matrix;
  linalg::note_factorization();
  Eigen::SelfAdjointEigenSolver<Matrix> es(lql);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite("LimitDrawContext: L Q L' is not positive definite");
  lql_inv_sqrt_ = es.eigenvectors() *
                  es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                  es.eigenvectors().transpose();
  mixed_ = (lql - 2.0 * s * s / sc * eta * eta.transpose()) * lql_inv_sqrt_;
}

Vector LimitDrawContext::operator()(rng::Engine& eng) const {
  const double u1 = rng::standard_normal(eng);
  const double u2 = rng::standard_normal(eng);
  const Vector u3 = sample::sample_std_normal_vector(eng, k_);
  const double u4 = rng::standard_normal(eng);
  const double u5 = rng::standard_normal(eng);
  const Vector u6 = sample::sample_std_normal_vector(eng, k_);
  const double u7 = rng::standard_normal(eng);
  const Vector u8 = sample::sample_std_normal_vector(eng, k_);

  const double sc = s_ + c_;
  const double omc = 1.0 - c_;
  const double noise = std::sqrt(2.0 * omc * (c_ + 2.0 * mu_a_mu_));

  Vector out(dim());
  out(0) = std::sqrt(2.0) * omc * v_ * u1;
  out(1) = sqrt_v_ * (std::sqrt(omc) * u4 + std::sqrt(sc) * u5);
  out.segment(2, k_) = sqrt_v_ * (s_ * u5 / std::sqrt(sc) * eta_ + sq_ * u6);
  out(2 + k_) = (noise * u2 + 2.0 * s_ * std::sqrt(omc) * eta_.dot(lql_inv_sqrt_ * u3) +
                 std::sqrt(2.0) * sc * u7) /
                omc;
  out.segment(3 + k_, k_) = sq_ * u8 / std::sqrt(sc) +
                            std::sqrt(omc) / sc * (mixed_ * u3) -
                            s_ * noise * u2 / (sc * sc) * eta_;
  return out;
}

}  // namespace frontier::asymp
