#pragma once

#include <functional>
#include <string>

#include "dirms/errors.hpp"
#include "dirms/sphere.hpp"

//! Directional kernel profiles with derivatives, the special functions they
//! need (log-scale modified Bessel I, sphere surface areas), and the KDE
//! normalizing constant c_{h,q}(L) — by adaptive quadrature for arbitrary
//! kernels and in closed form for the von Mises kernel.
//!
//! Everything here is a pure function; kernels are immutable values that are
//! safe to share across threads.
namespace dirms::kernels {

//! Thrown when the adaptive quadrature for the normalizing constant cannot
//! reach the requested relative accuracy.
class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

//! Thrown when a kernel fails its construction-time validity spot-check
//! (finite at 0, nonnegative, monotonically decreasing).
class InvalidKernel : public Error {
 public:
  using Error::Error;
};

//! A decreasing kernel profile L with its first two derivatives.
//!
//! The profile is evaluated at r = (1 - xᵀXᵢ)/h² >= 0 only; profiles defined
//! on a slightly larger interval (for off-sphere differentiation) are not
//! needed and not modeled. `deriv2` may be empty, in which case Hessian
//! estimation refuses to run (the kernel is not C²).
//!
//! The three optional log-domain hooks exist for exponential-type profiles
//! (L > 0, L' < 0, L'' > 0 everywhere): they return log L(r), log|L'(r)| and
//! log|L''(r)| and let weighted sums factor out the dominant exponent, which
//! keeps small-bandwidth evaluation finite where the plain forms underflow.
struct DirectionalKernel {
  std::string name;
  std::function<double(double)> eval;    //!< L(r)
  std::function<double(double)> deriv;   //!< L'(r)
  std::function<double(double)> deriv2;  //!< L''(r); empty when the kernel is not C²
  std::function<double(double)> log_eval;        //!< log L(r), optional
  std::function<double(double)> log_abs_deriv;   //!< log|L'(r)|, optional
  std::function<double(double)> log_abs_deriv2;  //!< log|L''(r)|, optional
};

//! How a normalizing constant was obtained.
enum class NormalizationMethod { closed_form, quadrature };

//! The constant c_{h,q}(L) that makes the directional KDE integrate to one,
//! together with the parameters it was computed for.
struct NormalizingConstant {
  double value = 0.0;
  double h = 0.0;
  int q = 0;
  NormalizationMethod method = NormalizationMethod::quadrature;
};

//! The exponential profile L(r) = e^{-r} with L'(r) = -e^{-r} and
//! L''(r) = e^{-r}, including log-domain hooks. Validated at construction.
DirectionalKernel von_mises_kernel();

//! Spot-checks the kernel on the grid r ∈ {0, 0.1, …, 20}: L finite at 0,
//! nonnegative, monotonically decreasing, L' <= 0. Throws InvalidKernel.
//! These are per-kernel properties the library can only sample, not prove.
void validate_kernel(const DirectionalKernel& kernel);

//! Surface area of S^q: 2 π^{(q+1)/2} / Γ((q+1)/2). Requires q >= 0.
double surface_area(int q);

//! λ_{h,q}(L) = ω̄_{q-1} ∫₀^{2h⁻²} L(r) r^{q/2-1} (2 - r h²)^{q/2-1} dr by
//! adaptive Gauss–Kronrod quadrature. The integrand has algebraic endpoint
//! singularities (both ends for q = 1, the right end for odd q); both halves
//! are transformed by square-root substitutions (r = t² on the left,
//! u = (2h⁻² - r)^{1/2} on the right) that make the integrand smooth for
//! every q >= 1. Throws QuadratureFailure below relative accuracy 1e-9.
double lambda_hq(const DirectionalKernel& kernel, double h, int q);

//! c_{h,q}(L) = (h^q λ_{h,q}(L))⁻¹, using the closed Bessel form
//! C_q(1/h²) e^{1/h²} for the von Mises kernel and quadrature otherwise.
NormalizingConstant normalizing_constant(const DirectionalKernel& kernel, double h, int q);

//! log I_α(ν) for α >= 0, ν >= 0, computed entirely in the log domain (no
//! overflow up to ν = 1e6 and beyond).
//!
//! For ν <= 50 the defining integral representation
//!   I_α(ν) = (ν/2)^α / (√π Γ(α+½)) ∫_{-1}^{1} (1-t²)^{α-1/2} e^{νt} dt
//! is evaluated after the exact substitution t = cos φ (200-node
//! Gauss–Legendre, log-sum-exp accumulation); for larger ν the large-argument
//! asymptotic series is summed to its smallest term, which terminates exactly
//! for half-integer α. Throws Error when α² >> ν puts the argument outside
//! the asymptotic branch's validity (far beyond any use in this library).
double log_bessel_i(double alpha, double nu);

//! Log-density of the von Mises–Fisher distribution on S^q:
//! log C_q(ν) + ν μᵀx with
//! log C_q(ν) = ((q-1)/2) log ν - ((q+1)/2) log 2π - log I_{(q-1)/2}(ν).
//! ν = 0 yields the uniform density 1/surface_area(q). Throws
//! sphere::WrongDimensionError when x, μ and q disagree.
double vmf_log_density(const sphere::UnitVector& x, const sphere::UnitVector& mu, double nu, int q);

}  // namespace dirms::kernels
