#include "frontier/samplers.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "frontier/errors.hpp"

namespace frontier::sample {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double sample_chi2(rng::Engine& eng, double dof) {
  if (dof < 1.0) throw ConfigError("sample_chi2: dof must be >= 1");
  return rng::chi_squared(eng, dof);
}

double sample_noncentral_chi2(rng::Engine& eng, double dof, double nc) {
  if (dof < 1.0) throw ConfigError("sample_noncentral_chi2: dof must be >= 1");
  if (nc < 0.0) throw ConfigError("sample_noncentral_chi2: negative noncentrality");
  if (nc < 1e-14) return rng::chi_squared(eng, dof);
  std::poisson_distribution<int> pois(0.5 * nc);
  const int j = pois(eng);
  return rng::chi_squared(eng, dof + 2.0 * j);
}

double sample_student_t(rng::Engine& eng, double dof) {
  const double z = rng::standard_normal(eng);
  const double w = rng::chi_squared(eng, dof);
  return z * std::sqrt(dof / w);
}

Vector sample_std_normal_vector(rng::Engine& eng, int k) {
  Vector z(k);
  for (int i = 0; i < k; ++i) z(i) = rng::standard_normal(eng);
  return z;
}

Vector sample_mv_t(rng::Engine& eng, int k, double dof) {
  const Vector z = sample_std_normal_vector(eng, k);
  const double w = rng::chi_squared(eng, dof);
  return z * std::sqrt(dof / w);
}

double sample_noncentral_f(rng::Engine& eng, double d1, double d2, double nc) {
  const double num = sample_noncentral_chi2(eng, d1, nc) / d1;
  const double den = rng::chi_squared(eng, d2) / d2;
  return num / den;
}

SamplerInputs make_sampler_inputs(const model::PopulationModel& model,
                                  const model::FrontierQuantities& frontier,
                                  const model::LinearCombination& lincomb, int n) {
  if (n <= model.p) throw InsufficientSample("make_sampler_inputs: need n > p");
  SamplerInputs in;
  in.n = n;
  in.p = model.p;
  in.k = lincomb.k;
  in.dof3 = in.p - in.k - 1;
  if (in.dof3 < 1) throw DegenerateDof("make_sampler_inputs: need p - k - 1 >= 1");
  lincomb.check_stacked_rank(model.mu);

  in.v_gmv = frontier.v_gmv;
  in.r_gmv = frontier.r_gmv;
  in.s = frontier.s;
  in.theta = lincomb.l * frontier.w_gmv;
  in.eta = frontier.s_valid ? Vector(lincomb.l * frontier.v_sf)
                            : Vector(lincomb.l * (frontier.q * model.mu));
  in.lql = lincomb.l * frontier.q * lincomb.l.transpose();
  in.lql = 0.5 * (in.lql + in.lql.transpose());

  linalg::note_factorization();
  Eigen::SelfAdjointEigenSolver<Matrix> es(in.lql);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite("make_sampler_inputs: L Q L' is not positive definite");
  const Matrix u = es.eigenvectors();
  const Vector ev = es.eigenvalues();
  in.lql_sqrt = u * ev.cwiseSqrt().asDiagonal() * u.transpose();
  in.lql_inv_sqrt = u * ev.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();

  const Vector lql_inv_eta = u * ev.cwiseInverse().asDiagonal() * (u.transpose() * in.eta);
  in.mu_a_mu = in.s - in.s * in.s * in.eta.dot(lql_inv_eta);
  if (in.mu_a_mu < -1e-9)
    throw NotPositiveSemiDefinite("make_sampler_inputs: mu' A mu is negative");
  in.mu_a_mu = std::max(in.mu_a_mu, 0.0);
  in.noncentrality = n * in.mu_a_mu;
  return in;
}

LatentDraw draw_latents(const SamplerInputs& in, rng::Engine& eng) {
  LatentDraw lat;
  lat.xi1 = sample_chi2(eng, in.n - in.p);
  lat.xi2 = sample_chi2(eng, in.n - in.p + 2);
  lat.xi3 = sample_noncentral_chi2(eng, in.dof3, in.noncentrality);
  lat.z1 = rng::standard_normal(eng);
  lat.z2 = in.lql_sqrt * sample_std_normal_vector(eng, in.k);
  lat.t1 = sample_student_t(eng, in.n - in.p + 1);
  lat.t2 = sample_mv_t(eng, in.k, in.n - in.p + 2);
  lat.t3 = sample_mv_t(eng, in.k, in.n - in.p + 3);
  return lat;
}

JointDraw assemble_joint(const SamplerInputs& in, const LatentDraw& lat) {
  const double n = in.n;
  const double np1 = in.n - in.p + 1;
  const double np2 = in.n - in.p + 2;
  const double np3 = in.n - in.p + 3;
  const double sqrt_v = std::sqrt(in.v_gmv);

  const Vector w = in.s * in.eta + lat.z2 / std::sqrt(n);
  const Vector u = in.lql_inv_sqrt * w;  // (LQL')^{-1/2} w
  const double utu = u.squaredNorm();    // w' (LQL')^{-1} w
  const double f = lat.xi3 / n + utu;

  // Analytic square root of LQL' - w w'/f, applied through its action:
  // Sq1 x = LQL'^{1/2} (x - c1 u (u' x)).
  const double c1 = utu < 1e-14 ? 1.0 / (2.0 * f)
                                : (1.0 - std::sqrt(lat.xi3 / (n * f))) / utu;
  const auto sq1_apply = [&](const Vector& x) -> Vector {
    return in.lql_sqrt * (x - c1 * u.dot(x) * u);
  };

  const double tt = 1.0 + lat.t1 * lat.t1 / np1;
  const double sqrt_tt = std::sqrt(tt);

  JointDraw out;
  out.f = f;
  out.v_hat = in.v_gmv / (n - 1.0) * lat.xi1;
  out.r_hat = in.r_gmv +
              sqrt_v * (lat.z1 / std::sqrt(n) + std::sqrt(f) * lat.t1 / std::sqrt(np1));
  out.theta_hat = in.theta +
                  sqrt_v * (w * (lat.t1 / (std::sqrt(f) * std::sqrt(np1))) +
                            sq1_apply(lat.t2) * (sqrt_tt / std::sqrt(np2)));
  out.s_hat = (n - 1.0) * tt * f / lat.xi2;

  // Analytic square root of I + f t2 t2'/(n-p+2).
  const double q2 = lat.t2.squaredNorm();
  const double a2 = q2 < 1e-14 ? 0.5 * f / np2
                               : (std::sqrt(1.0 + f * q2 / np2) - 1.0) / q2;
  const Vector inner = lat.t2 * (lat.t1 / (sqrt_tt * std::sqrt(np2) * std::sqrt(np1))) +
                       (lat.t3 + a2 * lat.t2.dot(lat.t3) * lat.t2) / std::sqrt(np3);
  out.eta_hat = w / f + sq1_apply(inner) / std::sqrt(f);
  return out;
}

WeightDraw draw_weights(const SamplerInputs& in, const model::PortfolioSpec& spec,
                        const JointDraw& joint) {
  WeightDraw out;
  if (spec.kind == model::PortfolioKind::GMV) {
    out.lw = joint.theta_hat;
    return out;
  }
  try {
    const double g = model::g_value(spec, joint.r_hat, joint.v_hat, joint.s_hat);
    out.lw = joint.theta_hat + g * joint.eta_hat;
  } catch (const DomainError&) {
    out.lw = Vector::Constant(in.k, kNaN);
    out.ok = false;
  }
  return out;
}

CharacteristicsDraw draw_characteristics(double r_gmv, double v_gmv, double s, int n,
                                         int p, const model::PortfolioSpec& spec,
                                         rng::Engine& eng) {
  if (n <= p) throw InsufficientSample("draw_characteristics: need n > p");
  if (s < 0.0) throw ConfigError("draw_characteristics: negative slope");
  const double xi = sample_chi2(eng, n - p);
  const double psi = sample_noncentral_f(eng, p - 1, n - p + 1, n * s);
  const double z = rng::standard_normal(eng);

  CharacteristicsDraw out;
  out.v_hat = v_gmv / (n - 1.0) * xi;
  // r_hat and s_hat share the same F variate psi.
  out.r_hat = r_gmv +
              std::sqrt(v_gmv / n * (1.0 + (p - 1.0) / (n - p + 1.0) * psi)) * z;
  out.s_hat = (n - 1.0) * (p - 1.0) / (static_cast<double>(n) * (n - p + 1.0)) * psi;
  try {
    out.chars = model::characteristics(spec, out.r_hat, out.v_hat, out.s_hat);
  } catch (const DomainError&) {
    out.ok = false;
    out.chars = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  }
  return out;
}

BruteSampler::BruteSampler(const model::PopulationModel& model,
                           const model::LinearCombination& lincomb, int n,
                           model::PortfolioSpec spec, Scenario scenario, int t_dof)
    : n_(n),
      p_(model.p),
      t_dof_(t_dof),
      spec_(spec),
      scenario_(scenario),
      mu_(model.mu),
      l_(lincomb.l) {
  if (n_ <= p_ + 2) throw InsufficientSample("BruteSampler: need n > p + 2");
  if (scenario_ == Scenario::student_t && t_dof_ <= 2)
    throw ConfigError("BruteSampler: t scenario needs dof > 2");
  Matrix scale = model.sigma;
  if (scenario_ == Scenario::student_t)
    scale *= (t_dof_ - 2.0) / static_cast<double>(t_dof_);
  linalg::note_factorization();
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("BruteSampler: covariance factorization failed");
  sigma_chol_ = llt.matrixL();
}

BruteSampler::Draw BruteSampler::operator()(rng::Engine& eng) const {
  Matrix z(n_, p_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < p_; ++j) z(i, j) = rng::standard_normal(eng);
  Matrix x = z * sigma_chol_.transpose();
  if (scenario_ == Scenario::student_t) {
    for (int i = 0; i < n_; ++i) {
      const double w = rng::chi_squared(eng, t_dof_);
      x.row(i) *= std::sqrt(t_dof_ / w);
    }
  }
  x.rowwise() += mu_.transpose();

  const Vector mu_hat = x.colwise().mean();
  x.rowwise() -= mu_hat.transpose();
  Matrix sigma_hat = Matrix::Zero(p_, p_);
  sigma_hat.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / (n_ - 1.0));
  sigma_hat = sigma_hat.selfadjointView<Eigen::Lower>();

  linalg::note_factorization();
  Eigen::LLT<Matrix> llt(sigma_hat);
  if (llt.info() != Eigen::Success)
    throw SingularSampleCovariance("BruteSampler: sample covariance is singular");
  const model::FrontierCore core = model::frontier_core(mu_hat, llt);

  Draw out;
  out.joint.v_hat = core.v_gmv;
  out.joint.r_hat = core.r_gmv;
  out.joint.s_hat = core.s;
  out.joint.theta_hat = l_ * (core.sigma_inv_one * core.v_gmv);
  out.joint.eta_hat = core.s_valid ? Vector(l_ * (core.q_mu / core.s))
                                   : Vector::Constant(l_.rows(), kNaN);
  out.joint.f = kNaN;

  if (spec_.kind == model::PortfolioKind::GMV) {
    out.weight.lw = out.joint.theta_hat;
  } else {
    try {
      const double g = model::g_value(spec_, core.r_gmv, core.v_gmv, core.s);
      out.weight.lw = out.joint.theta_hat + g * out.joint.eta_hat;
    } catch (const DomainError&) {
      out.weight.lw = Vector::Constant(l_.rows(), kNaN);
      out.weight.ok = false;
    }
  }
  try {
    out.chars = model::characteristics(spec_, core.r_gmv, core.v_gmv, core.s);
  } catch (const DomainError&) {
    out.chars = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    out.chars_ok = false;
  }
  return out;
}

double DrawBatch::violation_rate() const {
  if (domain_violation.empty()) return 0.0;
  std::size_t bad = 0;
  for (bool v : domain_violation) bad += v ? 1 : 0;
  return static_cast<double>(bad) / static_cast<double>(domain_violation.size());
}

std::vector<double> DrawBatch::column(const std::string& name, int coord) const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (name == "v_hat") out.push_back(v_hat[i]);
    else if (name == "r_hat") out.push_back(r_hat[i]);
    else if (name == "s_hat") out.push_back(s_hat[i]);
    else if (name == "theta_hat") out.push_back(theta_hat[i](coord));
    else if (name == "eta_hat") out.push_back(eta_hat[i](coord));
    else if (name == "lw_hat") out.push_back(lw_hat[i](coord));
    else if (name == "r_g") out.push_back(chars[i].r_g);
    else if (name == "v_g") out.push_back(chars[i].v_g);
    else if (name == "var_g") out.push_back(chars[i].var_g);
    else if (name == "cvar_g") out.push_back(chars[i].cvar_g);
    else if (name == "vor_g") out.push_back(chars[i].vor_g);
    else if (name == "cvor_g") out.push_back(chars[i].cvor_g);
    else throw ConfigError("DrawBatch: unknown column " + name);
  }
  return out;
}

void DrawBatch::write_csv(std::ostream& os) const {
  os << "draw_index, v_hat, r_hat, s_hat";
  for (int j = 1; j <= k; ++j) os << ", theta_hat_" << j;
  for (int j = 1; j <= k; ++j) os << ", eta_hat_" << j;
  for (int j = 1; j <= k; ++j) os << ", lw_hat_" << j;
  os << ", r_g, v_g, var_g, cvar_g, vor_g, cvor_g, domain_violation\n";
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    os << i << ", " << v_hat[i] << ", " << r_hat[i] << ", " << s_hat[i];
    for (int j = 0; j < k; ++j) os << ", " << theta_hat[i](j);
    for (int j = 0; j < k; ++j) os << ", " << eta_hat[i](j);
    for (int j = 0; j < k; ++j) os << ", " << lw_hat[i](j);
    const auto& c = chars[i];
    os << ", " << c.r_g << ", " << c.v_g << ", " << c.var_g << ", " << c.cvar_g << ", "
       << c.vor_g << ", " << c.cvor_g << ", " << (domain_violation[i] ? 1 : 0) << "\n";
  }
  os.precision(old_precision);
}

namespace {

void reserve_batch(DrawBatch& b, std::size_t n) {
  b.v_hat.reserve(n);
  b.r_hat.reserve(n);
  b.s_hat.reserve(n);
  b.theta_hat.reserve(n);
  b.eta_hat.reserve(n);
  b.lw_hat.reserve(n);
  b.chars.reserve(n);
  b.domain_violation.reserve(n);
}

}  // namespace

DrawBatch run_fast_batch(const SamplerInputs& in, const model::PortfolioSpec& spec,
                         std::size_t b, std::uint64_t seed) {
  DrawBatch batch;
  batch.k = in.k;
  batch.seed = seed;
  batch.provenance = Provenance::stochastic_rep;
  reserve_batch(batch, b);
  for (std::size_t i = 0; i < b; ++i) {
    rng::Engine eng = rng::substream(seed, i);
    const JointDraw joint = draw_joint(in, eng);
    const WeightDraw wd = draw_weights(in, spec, joint);
    bool violation = !wd.ok;
    model::PortfolioCharacteristics chars;
    try {
      chars = model::characteristics(spec, joint.r_hat, joint.v_hat, joint.s_hat);
    } catch (const DomainError&) {
      chars = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
      violation = true;
    }
    batch.v_hat.push_back(joint.v_hat);
    batch.r_hat.push_back(joint.r_hat);
    batch.s_hat.push_back(joint.s_hat);
    batch.theta_hat.push_back(joint.theta_hat);
    batch.eta_hat.push_back(joint.eta_hat);
    batch.lw_hat.push_back(wd.lw);
    batch.chars.push_back(chars);
    batch.domain_violation.push_back(violation);
  }
  if (batch.violation_rate() > 0.5)
    throw DomainError("run_fast_batch: domain violation rate above 50%");
  return batch;
}

DrawBatch run_brute_batch(const BruteSampler& sampler, const model::PortfolioSpec& spec,
                          std::size_t b, std::uint64_t seed) {
  (void)spec;  // baked into the sampler
  DrawBatch batch;
  batch.seed = seed;
  batch.provenance = Provenance::brute_force;
  reserve_batch(batch, b);
  for (std::size_t i = 0; i < b; ++i) {
    rng::Engine eng = rng::substream(seed, i);
    const BruteSampler::Draw d = sampler(eng);
    batch.k = static_cast<int>(d.joint.theta_hat.size());
    batch.v_hat.push_back(d.joint.v_hat);
    batch.r_hat.push_back(d.joint.r_hat);
    batch.s_hat.push_back(d.joint.s_hat);
    batch.theta_hat.push_back(d.joint.theta_hat);
    batch.eta_hat.push_back(d.joint.eta_hat);
    batch.lw_hat.push_back(d.weight.lw);
    batch.chars.push_back(d.chars);
    batch.domain_violation.push_back(!d.weight.ok || !d.chars_ok);
  }
  if (batch.violation_rate() > 0.5)
    throw DomainError("run_brute_batch: domain violation rate above 50%");
  return batch;
}

}  // namespace frontier::sample
