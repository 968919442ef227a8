#pragma once

#include <stdexcept>
#include <string>

namespace frontier {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Population covariance matrix is not (numerically) positive definite.
struct SingularCovariance : Error {
  using Error::Error;
};

/// Sample covariance matrix is numerically singular (n too close to p).
struct SingularSampleCovariance : Error {
  using Error::Error;
};

/// A portfolio g-function was evaluated outside its domain.
struct DomainError : Error {
  using Error::Error;
};

/// Frontier slope s is (numerically) zero where a positive slope is required.
struct DegenerateSlope : Error {
  using Error::Error;
};

/// A rank-one downdate would leave the matrix indefinite.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

/// Input matrix has an eigenvalue below the PSD tolerance.
struct NotPositiveSemiDefinite : Error {
  using Error::Error;
};

/// Joint sampling requires p - k - 1 >= 1.
struct DegenerateDof : Error {
  using Error::Error;
};

/// Not enough observations for the requested estimator.
struct InsufficientSample : Error {
  using Error::Error;
};

/// Consistent slope estimate came out nonpositive.
struct NonpositiveSlopeEstimate : Error {
  using Error::Error;
};

/// Plug-in asymptotic covariance is numerically singular.
struct SingularOmega : Error {
  using Error::Error;
};

/// Invalid experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace frontier
