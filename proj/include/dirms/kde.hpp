#pragma once

#include <vector>

#include "dirms/errors.hpp"
#include "dirms/kernels.hpp"
#include "dirms/sphere.hpp"

//! The directional kernel density estimator in both of its algebraic forms,
//! its total (ambient) gradients, the shared Riemannian gradient, the
//! Riemannian Hessian estimator, and tangent-space eigenanalysis.
namespace dirms::kde {

using sphere::Matrix;
using sphere::Vector;

//! Thrown by riemannian_hessian when the kernel carries no second
//! derivative and therefore cannot support Hessian estimation.
class KernelNotC2 : public Error {
 public:
  using Error::Error;
};

//! An immutable directional KDE: the sample, the bandwidth, the kernel
//! profile, and the precomputed normalizing constant. All evaluations are
//! pure, so one model may be shared freely across threads.
class KdeModel {
 public:
  //! \param data n×(q+1) matrix with one observation per row.
  //! \param h bandwidth, > 0.
  //! \param kernel kernel profile (validated at kernel construction).
  //!
  //! Requires n >= 1, q >= 1, every row unit-norm to 1e-10; computes
  //! c_{h,q}(L) up front (closed form for the von Mises kernel).
  KdeModel(Matrix data, double h, kernels::DirectionalKernel kernel);

  //! Same as above but reuses a normalizing constant computed earlier for
  //! the same kernel, h and q — the constant does not depend on the data, so
  //! algorithms that re-weight a evolving point cloud (blurring mean shift)
  //! can skip recomputing it each sweep.
  KdeModel(Matrix data, double h, kernels::DirectionalKernel kernel,
           kernels::NormalizingConstant precomputed);

  const Matrix& data() const { return data_; }
  double h() const { return h_; }
  int q() const { return static_cast<int>(data_.cols()) - 1; }
  Eigen::Index n() const { return data_.rows(); }
  const kernels::DirectionalKernel& kernel() const { return kernel_; }
  const kernels::NormalizingConstant& norm_const() const { return norm_; }

 private:
  Matrix data_;
  double h_;
  kernels::DirectionalKernel kernel_;
  kernels::NormalizingConstant norm_;
};

//! Riemannian Hessian of the KDE at a point, as the full ambient matrix
//! plus its tangent-space eigenstructure.
struct HessianReport {
  Matrix matrix;                                //!< (q+1)×(q+1), symmetric, annihilates x
  Vector tangent_eigenvalues;                   //!< q values, sorted descending
  std::vector<sphere::TangentVector> tangent_eigenvectors;  //!< matching order
};

//! KDE value (c_{h,q}(L)/n)·Σᵢ L((1 − xᵀXᵢ)/h²).
//!
//! Kernels with log hooks are accumulated log-sum-exp style so that small
//! bandwidths cannot overflow or spuriously underflow; when the true value
//! is below the double range the function reports exactly 0.
double density(const KdeModel& model, const sphere::UnitVector& x);

//! The same estimator written through squared Euclidean distances,
//! (c_{h,q}(L)/n)·Σᵢ L(½‖(x − Xᵢ)/h‖²), defined for any nonzero x. Equals
//! density() whenever ‖x‖ = 1; off the sphere the two forms deliberately
//! differ.
double density_alt(const KdeModel& model, const Vector& x);

//! Ambient gradient of the on-sphere form: −(c/(n h²))·Σᵢ Xᵢ·L′((1−xᵀXᵢ)/h²).
Vector total_gradient_hat(const KdeModel& model, const sphere::UnitVector& x);

//! Ambient gradient of the squared-distance form:
//! (c/(n h²))·Σᵢ (x − Xᵢ)·L′(½‖(x − Xᵢ)/h‖²). On the sphere it differs from
//! total_gradient_hat only by a multiple of x.
Vector total_gradient_alt(const KdeModel& model, const Vector& x);

//! Tangent projection (I − xxᵀ) of the total gradient — identical for both
//! algebraic forms on the sphere.
sphere::TangentVector riemannian_gradient(const KdeModel& model, const sphere::UnitVector& x);

//! Signed radial component xᵀ∇f̂(x) of the total gradient; positive at
//! well-behaved modes and used by diagnostics.
double radial_gradient_magnitude(const KdeModel& model, const sphere::UnitVector& x);

//! A positive scalar multiple of Σᵢ Xᵢ·|L′((1−xᵀXᵢ)/h²)| with the dominant
//! exponential factored out, so the direction survives even where the
//! gradient itself underflows. This is the unnormalized mean-shift
//! numerator; callers normalize it. Returns the zero vector only when every
//! weight is exactly zero.
Vector shift_numerator(const KdeModel& model, const sphere::UnitVector& x);

//! Riemannian Hessian estimator
//! (I−xxᵀ)[(c/(n h⁴))·Σᵢ XᵢXᵢᵀ·L″(rᵢ) + (c/(n h²))·Σᵢ xᵀXᵢ·L′(rᵢ)·I](I−xxᵀ)
//! with tangent eigenvalues/vectors from the q×q matrix BᵀHB, B an
//! orthonormal tangent basis at x. Throws KernelNotC2 when the kernel has
//! no second derivative.
HessianReport riemannian_hessian(const KdeModel& model, const sphere::UnitVector& x);

}  // namespace dirms::kde
