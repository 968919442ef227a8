#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "frontier/linalg.hpp"
#include "frontier/model.hpp"
#include "frontier/rng.hpp"

namespace frontier::sample {

using linalg::Matrix;
using linalg::Vector;

// --- distribution primitives ---------------------------------------------

double sample_chi2(rng::Engine& eng, double dof);
/// Poisson mixture of central chi-squared draws; exact for any dof >= 1.
double sample_noncentral_chi2(rng::Engine& eng, double dof, double nc);
double sample_student_t(rng::Engine& eng, double dof);
/// t_k(dof) with identity scale matrix: N_k(0, I) * sqrt(dof / chi2_dof).
Vector sample_mv_t(rng::Engine& eng, int k, double dof);
double sample_noncentral_f(rng::Engine& eng, double d1, double d2, double nc);
Vector sample_std_normal_vector(rng::Engine& eng, int k);

// --- exact draw engine ----------------------------------------------------

/// Everything the per-draw assembly needs, computed once per configuration.
/// No factorization happens after construction.
struct SamplerInputs {
  int n = 0;
  int p = 0;
  int k = 0;
  double v_gmv = 0.0;
  double r_gmv = 0.0;
  double s = 0.0;
  Vector theta;          // L w_GMV
  Vector eta;            // L v
  Matrix lql;            // L Q L'
  Matrix lql_sqrt;       // symmetric square root
  Matrix lql_inv_sqrt;   // symmetric inverse square root
  double mu_a_mu = 0.0;  // mu' A mu = s - s^2 eta' (LQL')^{-1} eta
  double noncentrality = 0.0;  // n * mu' A mu
  int dof3 = 0;                // p - k - 1
};

SamplerInputs make_sampler_inputs(const model::PopulationModel& model,
                                  const model::FrontierQuantities& frontier,
                                  const model::LinearCombination& lincomb, int n);

/// The independent latent variables behind one joint draw.
struct LatentDraw {
  double xi1 = 0.0;  // chi2_{n-p}
  double xi2 = 0.0;  // chi2_{n-p+2}
  double xi3 = 0.0;  // noncentral chi2_{p-k-1}
  double z1 = 0.0;   // N(0,1)
  Vector z2;         // N_k(0, LQL')
  double t1 = 0.0;   // t(n-p+1)
  Vector t2;         // t_k(n-p+2), identity scale
  Vector t3;         // t_k(n-p+3), identity scale
};

LatentDraw draw_latents(const SamplerInputs& in, rng::Engine& eng);

struct JointDraw {
  double v_hat = 0.0;
  double r_hat = 0.0;
  Vector theta_hat;
  double s_hat = 0.0;
  Vector eta_hat;
  double f = 0.0;  // intermediate, retained for tests
};

/// Deterministic assembly of one joint draw from its latents.
JointDraw assemble_joint(const SamplerInputs& in, const LatentDraw& lat);

inline JointDraw draw_joint(const SamplerInputs& in, rng::Engine& eng) {
  return assemble_joint(in, draw_latents(in, eng));
}

/// One draw of L w_g coupled to `joint` (same latents): theta_hat plus the
/// plug-in g evaluated at the drawn scalars times eta_hat.  Domain failures
/// of g yield a NaN vector with ok=false instead of throwing.
struct WeightDraw {
  Vector lw;
  bool ok = true;
};

WeightDraw draw_weights(const SamplerInputs& in, const model::PortfolioSpec& spec,
                        const JointDraw& joint);

/// Direct draw of the estimated frontier scalars (shared noncentral-F
/// variate between r_hat and s_hat) plus the induced characteristics.
struct CharacteristicsDraw {
  double v_hat = 0.0;
  double r_hat = 0.0;
  double s_hat = 0.0;
  model::PortfolioCharacteristics chars;
  bool ok = true;  // false when g's domain failed at the drawn point
};

CharacteristicsDraw draw_characteristics(double r_gmv, double v_gmv, double s, int n,
                                         int p, const model::PortfolioSpec& spec,
                                         rng::Engine& eng);

// --- brute-force oracle ---------------------------------------------------

enum class Scenario { normal, student_t };

/// Simulates full n-by-p return samples and computes the plug-in quantities
/// by dense solves.  Used as the validation oracle for the draw engine.
class BruteSampler {
 public:
  BruteSampler(const model::PopulationModel& model, const model::LinearCombination& lincomb,
               int n, model::PortfolioSpec spec, Scenario scenario, int t_dof = 10);

  struct Draw {
    JointDraw joint;
    WeightDraw weight;
    model::PortfolioCharacteristics chars;
    bool chars_ok = true;
  };

  Draw operator()(rng::Engine& eng) const;

  int n() const { return n_; }
  int p() const { return p_; }

 private:
  int n_, p_, t_dof_;
  model::PortfolioSpec spec_;
  Scenario scenario_;
  Vector mu_;
  Matrix sigma_chol_;  // lower Cholesky factor of (scaled) Sigma
  Matrix l_;
};

// --- batches --------------------------------------------------------------

enum class Provenance { stochastic_rep, brute_force };

/// Columnar store of b draws.  Filled deterministically: draw i always uses
/// RNG substream i of the batch seed, so the layout is reproducible and
/// order-independent.
struct DrawBatch {
  int k = 0;
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::stochastic_rep;
  std::vector<double> v_hat, r_hat, s_hat;
  std::vector<Vector> theta_hat, eta_hat, lw_hat;
  std::vector<model::PortfolioCharacteristics> chars;
  std::vector<bool> domain_violation;

  std::size_t size() const { return v_hat.size(); }
  double violation_rate() const;

  /// Extracts one scalar column; theta/eta/lw take a coordinate index.
  std::vector<double> column(const std::string& name, int coord = 0) const;

  void write_csv(std::ostream& os) const;
};

/// Fast path: b draws via the stochastic representation, with coupled
/// weights and characteristics.  Throws DomainError if more than half of
/// the draws violate g's domain.
DrawBatch run_fast_batch(const SamplerInputs& in, const model::PortfolioSpec& spec,
                         std::size_t b, std::uint64_t seed);

/// Oracle path: b draws through BruteSampler.
DrawBatch run_brute_batch(const BruteSampler& sampler, const model::PortfolioSpec& spec,
                          std::size_t b, std::uint64_t seed);

}  // namespace frontier::sample
