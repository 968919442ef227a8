#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "frontier/rng.hpp"

namespace frontier::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of matrix factorizations (eigendecompositions, Cholesky, QR)
/// performed so far.  Draw hot loops are required to leave this untouched;
/// tests assert a zero delta across batch generation.
std::uint64_t factorization_count();

/// Bump the factorization counter.  Called at every decomposition site.
void note_factorization();

struct SqrtFactor {
  Matrix matrix;
  bool source_rank_one = false;

  /// The matrix this factor is a square root of.  Rank-one factors are not
  /// symmetric in general, so the square is always formed as X*X^T.
  Matrix squared() const { return matrix * matrix.transpose(); }
};

/// Square root of D - b b^T from a square root of D, the solve D^{-1} b and b.
/// No factorization is performed.
SqrtFactor sqrt_downdate(const Matrix& d_sqrt, const Vector& d_inv_b, const Vector& b);

/// Square root of I + d d^T, analytic rank-one form.
SqrtFactor sqrt_update_identity(const Vector& d);

/// Symmetric PSD square root via eigendecomposition; small negative
/// eigenvalues (>= -1e-12 * lambda_max) are clamped to zero.
SqrtFactor sym_sqrt(const Matrix& m);

/// Haar-distributed random orthogonal matrix (Gaussian QR with the signs of
/// R's diagonal folded into Q).
Matrix haar_orthogonal(int p, rng::Engine& eng);

}  // namespace frontier::linalg
