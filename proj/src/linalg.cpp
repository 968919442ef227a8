#include "frontier/linalg.hpp"

#include <atomic>
#include <cmath>

#include "frontier/errors.hpp"

namespace frontier::linalg {

namespace {
std::atomic<std::uint64_t> g_factorizations{0};
}

std::uint64_t factorization_count() { return g_factorizations.load(); }

void note_factorization() { g_factorizations.fetch_add(1, std::memory_order_relaxed); }

SqrtFactor sqrt_downdate(const Matrix& d_sqrt, const Vector& d_inv_b, const Vector& b) {
  const double q = b.dot(d_inv_b);
  if (q >= 1.0 - 1e-12) throw NotPositiveDefinite("sqrt_downdate: b' D^-1 b >= 1");
  SqrtFactor out;
  out.source_rank_one = true;
  if (q < 1e-14) {
    // Removable singularity: c -> 1/2 and the correction vanishes with b.
    out.matrix = d_sqrt;
    return out;
  }
  const double c = (1.0 - std::sqrt(1.0 - q)) / q;
  // D^{1/2}(I - c D^{-1/2} b b' D^{-1/2}) = D^{1/2} - c b (D^{-1} b)' D^{1/2}.
  out.matrix = d_sqrt - c * b * (d_inv_b.transpose() * d_sqrt);
  return out;
}

SqrtFactor sqrt_update_identity(const Vector& d) {
  const auto k = d.size();
  const double q = d.squaredNorm();
  SqrtFactor out;
  out.source_rank_one = true;
  const double a = q < 1e-14 ? 0.5 : (std::sqrt(1.0 + q) - 1.0) / q;
  out.matrix = Matrix::Identity(k, k) + a * d * d.transpose();
  return out;
}

SqrtFactor sym_sqrt(const Matrix& m) {
  note_factorization();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw Error("sym_sqrt: eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  const double lmax = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-8 * std::max(lmax, 1.0))
    throw NotPositiveSemiDefinite("sym_sqrt: matrix has a negative eigenvalue");
  Vector roots = ev.cwiseMax(0.0).cwiseSqrt();
  SqrtFactor out;
  out.source_rank_one = false;
  out.matrix = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

Matrix haar_orthogonal(int p, rng::Engine& eng) {
  Matrix z(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) z(i, j) = rng::standard_normal(eng);
  note_factorization();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace frontier::linalg
