#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dirms/errors.hpp"

//! Exact geometry of the unit hypersphere S^q embedded in R^{q+1}:
//! normalization, tangent projection, exponential/logarithm maps, geodesic
//! distance, tangent bases, and lon/lat coordinate conversions.
//!
//! All operations are pure and stateless; they are safe to call concurrently
//! from any number of threads.
namespace dirms::sphere {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

//! Thrown when a vector with (numerically) zero norm is normalized.
class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

//! Thrown by log_map for (numerically) antipodal inputs, where the map is
//! undefined. Any choice of direction would be arbitrary, so this is a hard
//! error rather than a silent convention.
class AntipodalPointsError : public Error {
 public:
  using Error::Error;
};

//! Thrown when a latitude outside [-90, 90] degrees is supplied.
class LatOutOfRangeError : public Error {
 public:
  using Error::Error;
};

//! Thrown when operand dimensions are inconsistent or unsupported.
class WrongDimensionError : public Error {
 public:
  using Error::Error;
};

//! A point on the unit sphere S^q, stored as its ambient coordinates in
//! R^{q+1}. The constructor accepts near-unit input (|‖v‖ - 1| <= 1e-6) and
//! rescales exactly, so ‖coords()‖ = 1 holds to 1e-12 after construction.
class UnitVector {
 public:
  //! Wraps a vector that is already (near-)unit length. Throws
  //! WrongDimensionError for ambient dimension < 2 and ZeroVectorError when
  //! the norm is too far from 1 to be a plausible sphere point.
  explicit UnitVector(Vector coords);

  const Vector& coords() const { return coords_; }

  //! Ambient dimension q+1.
  Eigen::Index dim() const { return coords_.size(); }

  //! Intrinsic sphere dimension q.
  int sphere_dim() const { return static_cast<int>(coords_.size()) - 1; }

  double dot(const UnitVector& other) const { return coords_.dot(other.coords_); }

 private:
  Vector coords_;
};

//! An ambient-space vector constrained orthogonal to a base point; carries
//! gradients and log-map outputs. Invariant: |base . vec| <= 1e-10 * max(1, ‖vec‖).
class TangentVector {
 public:
  TangentVector(UnitVector base, Vector vec);

  const UnitVector& base() const { return base_; }
  const Vector& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

  //! The same tangent vector scaled by a factor (same base point).
  TangentVector scaled(double factor) const { return TangentVector(base_, factor * vec_); }

 private:
  UnitVector base_;
  Vector vec_;
};

//! A (q+1) x q matrix whose orthonormal columns span the tangent space at
//! `base`: BᵀB = I_q and Bᵀ base = 0, both to 1e-12.
struct TangentBasis {
  UnitVector base;
  Matrix columns;
};

//! Returns v / ‖v‖₂. Throws ZeroVectorError when ‖v‖₂ <= 1e-300 (a degenerate
//! mean-shift numerator) and WrongDimensionError for vectors shorter than 2.
UnitVector normalize(const Vector& v);

//! Projects v onto the tangent space at x: returns (I - xxᵀ)v.
TangentVector tangent_project(const UnitVector& x, const Vector& v);

//! Great-circle distance in radians within [0, π], computed through chord
//! lengths: 2·asin(‖x−y‖/2) when x·y >= 0 and π − 2·asin(‖x+y‖/2) otherwise.
//! Unlike the textbook arccos of the dot product, both branches stay fully
//! accurate for nearly identical and nearly antipodal inputs (the arccos
//! form cannot resolve angles below ~1.5e-8). Chord arguments are clamped so
//! floating-point drift cannot produce NaN.
double geodesic_distance(const UnitVector& x, const UnitVector& y);

//! Exponential map: cos(‖v‖)·x + sin(‖v‖)·v/‖v‖. Returns x exactly when
//! ‖v‖ < 1e-15. Precondition: v is based at x.
UnitVector exp_map(const UnitVector& x, const TangentVector& v);

//! Logarithm map: the tangent vector at x with ‖log_x(y)‖ equal to the
//! geodesic distance and exp_map(x, log_map(x, y)) = y. Throws
//! AntipodalPointsError when x·y <= -1 + 1e-10 (cut locus).
TangentVector log_map(const UnitVector& x, const UnitVector& y);

//! Deterministic orthonormal tangent basis at x, built from the Householder
//! reflection that maps e₁ to x (the images of e₂,…,e_{q+1}). Numerically
//! stable near every x, including x ≈ ±e₁.
TangentBasis tangent_basis(const UnitVector& x);

//! (lon, lat) in degrees to the unit vector
//! (cos lat·cos lon, cos lat·sin lon, sin lat) on S². Throws
//! LatOutOfRangeError unless lat ∈ [-90, 90].
UnitVector lonlat_to_unit(double lon_deg, double lat_deg);

//! Inverse of lonlat_to_unit, returning (lon, lat) in degrees. Requires an
//! S² point (ambient dimension 3), else WrongDimensionError. At the poles the
//! longitude is not determined and is reported as 0.
std::pair<double, double> unit_to_lonlat(const UnitVector& x);

}  // namespace dirms::sphere
