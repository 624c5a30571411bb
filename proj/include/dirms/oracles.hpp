#pragma once

#include <functional>
#include <vector>

#include "dirms/errors.hpp"
#include "dirms/kde.hpp"
#include "dirms/sphere.hpp"

//! Independent brute-force references used by the test suite and the
//! `verify` command: finite-difference derivatives, dense grid mode search,
//! and sphere quadrature. None of these share derivative code with the
//! estimators they check — the quadrature even computes its own
//! Gauss–Legendre nodes.
namespace dirms::oracles {

using sphere::Matrix;
using sphere::Vector;

//! Thrown when a brute-force oracle is asked for a dimension it does not
//! cover (they are deliberately desk-scale).
class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

//! Dense angular grid parameters for mode search on S¹ or S².
struct GridSpec {
  int q = 2;            //!< 1 or 2
  int resolution = 64;  //!< points per angular axis, >= 16

  //! Throws std::invalid_argument / DimensionTooLarge on violations.
  void validate() const;
};

//! Central-difference gradient of the KDE's squared-distance ambient
//! extension (density_alt) at an arbitrary ambient point. step must lie in
//! [1e-7, 1e-3]. Consumers project to the tangent space before comparing
//! with on-sphere estimators.
Vector fd_gradient(const kde::KdeModel& model, const Vector& x, double step);

//! Central-difference Hessian of the same extension; symmetric by
//! construction up to O(step) rounding. step must lie in [1e-7, 1e-3].
Matrix fd_hessian(const kde::KdeModel& model, const Vector& x, double step);

//! Brute-force mode search: evaluates the density on a dense angular grid,
//! keeps cells that strictly beat every neighbor (2-neighborhood on S¹,
//! 8-neighborhood on S² with longitude wraparound and pole rows collapsed
//! to single points), then polishes each candidate with 20 mean-shift steps
//! and deduplicates the results within 1e-2 radians. May legitimately
//! return an empty list for flat densities. Throws DimensionTooLarge when
//! the model lives on S^q with q > 2.
std::vector<sphere::UnitVector> grid_modes(const kde::KdeModel& model, const GridSpec& grid);

//! ∫_{Ω_q} fn dω_q for q ∈ {1, 2, 3} by the iterated change of variables
//! x = (cos φ, sin φ·ξ): Gauss–Legendre in the colatitude φ (where the
//! slice weight sin^{q−1} φ is analytic for every q), and the spectrally
//! accurate periodic trapezoid rule once the recursion reaches the circle.
//! n_nodes is the node count per axis (>= 2; the circle uses 4·n_nodes
//! trapezoid points so mixed rules stay balanced).
double sphere_integral(const std::function<double(const Vector&)>& fn, int q, int n_nodes);

//! Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
//! computed from scratch by Newton iteration on the Legendre recurrence
//! (kept public so tests can cross-check the quadrature's own machinery).
void legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace dirms::oracles
