#include "dirms/sphere.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace dirms::sphere {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = 0.017453292519943295;  // pi / 180
constexpr double kRadToDeg = 57.29577951308232;     // 180 / pi

void require_same_dim(const UnitVector& x, const UnitVector& y, const char* where) {
  if (x.dim() != y.dim()) {
    throw WrongDimensionError(std::string(where) + ": operands have ambient dimensions " +
                              std::to_string(x.dim()) + " and " + std::to_string(y.dim()));
  }
}

}  // namespace

UnitVector::UnitVector(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw WrongDimensionError("UnitVector: ambient dimension must be at least 2, got " +
                              std::to_string(coords_.size()));
  }
  const double norm = coords_.norm();
  if (!(std::abs(norm - 1.0) <= 1e-6)) {
    throw ZeroVectorError("UnitVector: input norm " + std::to_string(norm) +
                          " is not unit length; use normalize() for raw vectors");
  }
  coords_ /= norm;  // kill residual drift so ‖coords‖ = 1 to machine precision
}

TangentVector::TangentVector(UnitVector base, Vector vec) : base_(std::move(base)), vec_(std::move(vec)) {
  if (base_.dim() != vec_.size()) {
    throw WrongDimensionError("TangentVector: base dimension " + std::to_string(base_.dim()) +
                              " does not match vector dimension " + std::to_string(vec_.size()));
  }
  const double align = std::abs(base_.coords().dot(vec_));
  if (align > 1e-10 * std::max(1.0, vec_.norm())) {
    throw WrongDimensionError("TangentVector: vector is not orthogonal to its base point (|x·v| = " +
                              std::to_string(align) + ")");
  }
}

UnitVector normalize(const Vector& v) {
  if (v.size() < 2) {
    throw WrongDimensionError("normalize: ambient dimension must be at least 2, got " +
                              std::to_string(v.size()));
  }
  const double norm = v.norm();
  if (!(norm > 1e-300)) {
    throw ZeroVectorError("normalize: vector norm " + std::to_string(norm) + " is numerically zero");
  }
  Vector scaled = v / norm;
  // Renormalize once more: for badly scaled inputs the first division can
  // leave relative error above the 1e-12 class invariant.
  scaled /= scaled.norm();
  return UnitVector(std::move(scaled));
}

TangentVector tangent_project(const UnitVector& x, const Vector& v) {
  if (x.dim() != v.size()) {
    throw WrongDimensionError("tangent_project: point dimension " + std::to_string(x.dim()) +
                              " does not match vector dimension " + std::to_string(v.size()));
  }
  Vector projected = v - x.coords() * x.coords().dot(v);
  // Re-project the rounding residue so the TangentVector invariant holds even
  // for ‖v‖ many orders of magnitude above 1.
  projected -= x.coords() * x.coords().dot(projected);
  return TangentVector(x, std::move(projected));
}

double geodesic_distance(const UnitVector& x, const UnitVector& y) {
  require_same_dim(x, y, "geodesic_distance");
  // acos(x·y) loses ~sqrt(eps) of absolute accuracy near 0 and pi; the
  // half-chord form 2*asin(chord/2) is well conditioned at the end it is
  // used for, so tiny angles resolve down to machine precision.
  const double dot = x.dot(y);
  if (dot >= 0.0) {
    const double chord = (x.coords() - y.coords()).norm();
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
  }
  const double anti_chord = (x.coords() + y.coords()).norm();
  return kPi - 2.0 * std::asin(std::min(1.0, 0.5 * anti_chord));
}

UnitVector exp_map(const UnitVector& x, const TangentVector& v) {
  assert((v.base().coords() - x.coords()).lpNorm<Eigen::Infinity>() <= 1e-12 &&
         "exp_map: tangent vector is not based at x");
  const double theta = v.norm();
  if (theta < 1e-15) {
    return x;
  }
  Vector moved = std::cos(theta) * x.coords() + (std::sin(theta) / theta) * v.vec();
  return normalize(moved);
}

TangentVector log_map(const UnitVector& x, const UnitVector& y) {
  require_same_dim(x, y, "log_map");
  const double c = std::clamp(x.dot(y), -1.0, 1.0);
  if (c <= -1.0 + 1e-10) {
    throw AntipodalPointsError("log_map: points are antipodal (x·y = " + std::to_string(c) +
                               "); the map is undefined at the cut locus");
  }
  const double theta = std::acos(c);
  Vector dir = y.coords() - c * x.coords();
  const double dir_norm = dir.norm();  // equals sin(theta) up to rounding
  if (dir_norm < 1e-300 || theta == 0.0) {
    return TangentVector(x, Vector::Zero(x.dim()));
  }
  return tangent_project(x, (theta / dir_norm) * dir);
}

TangentBasis tangent_basis(const UnitVector& x) {
  const Eigen::Index d = x.dim();
  const int q = x.sphere_dim();
  Matrix basis(d, q);
  Vector u = x.coords();
  u(0) -= 1.0;  // u = x - e1; the Householder reflection I - 2uuᵀ/uᵀu maps e1 to x
  const double uu = u.squaredNorm();
  if (uu < 1e-300) {
    // x coincides with e1: the reflection degenerates to the identity and the
    // tangent space is spanned by e2,…,e_{q+1} directly.
    basis = Matrix::Identity(d, d).rightCols(q);
    return TangentBasis{x, std::move(basis)};
  }
  for (int j = 0; j < q; ++j) {
    Vector col = Vector::Zero(d);
    col(j + 1) = 1.0;
    col -= (2.0 * u(j + 1) / uu) * u;
    basis.col(j) = col;
  }
  return TangentBasis{x, std::move(basis)};
}

UnitVector lonlat_to_unit(double lon_deg, double lat_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
    throw LatOutOfRangeError("lonlat_to_unit: latitude " + std::to_string(lat_deg) +
                             " is outside [-90, 90] degrees");
  }
  const double lon = lon_deg * kDegToRad;
  const double lat = lat_deg * kDegToRad;
  Vector v(3);
  v << std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat);
  return normalize(v);
}

std::pair<double, double> unit_to_lonlat(const UnitVector& x) {
  if (x.dim() != 3) {
    throw WrongDimensionError("unit_to_lonlat: expected an S² point (ambient dimension 3), got " +
                              std::to_string(x.dim()));
  }
  const Vector& v = x.coords();
  const double z = std::clamp(v(2), -1.0, 1.0);
  const double lat = std::asin(z) * kRadToDeg;
  const double planar = v(0) * v(0) + v(1) * v(1);
  // At the poles the longitude is undefined; report 0 by convention.
  const double lon = planar < 1e-24 ? 0.0 : std::atan2(v(1), v(0)) * kRadToDeg;
  return {lon, lat};
}

}  // namespace dirms::sphere
