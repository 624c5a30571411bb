#pragma once

#include "dirms/errors.hpp"
#include "dirms/sphere.hpp"

//! Rule-of-thumb bandwidth selection for the directional KDE and the
//! concentration estimate it requires. All functions are pure.
namespace dirms::bandwidth {

using sphere::Matrix;

//! Thrown when the sample is too concentrated (or too uniform) for the
//! concentration estimate to be meaningful; the caller must choose a
//! bandwidth manually.
class DegenerateConcentration : public Error {
 public:
  using Error::Error;
};

//! Result of rule-of-thumb bandwidth selection, carrying the intermediate
//! statistics for reporting.
struct BandwidthSelection {
  double h = 0.0;       //!< selected bandwidth, > 0
  double nu_hat = 0.0;  //!< estimated concentration of the vMF reference
  double r_bar = 0.0;   //!< mean resultant length, in [0, 1]
  Eigen::Index n = 0;   //!< sample size
  int q = 0;            //!< sphere dimension
};

//! Mean resultant length R̄ = ‖Σᵢ Xᵢ‖₂ / n of a sample of unit rows.
//! Requires n >= 1.
double mean_resultant_length(const Matrix& data);

//! Concentration estimate ν̂ = R̄(q + 1 − R̄²)/(1 − R̄²) of the vMF reference
//! density. Throws DegenerateConcentration when r_bar >= 1 − 1e-12 (all
//! points coincide, the estimate diverges).
double concentration_estimate(double r_bar, int q);

//! Rule-of-thumb bandwidth
//!   h = [ 4 √π I²_{(q−1)/2}(ν̂) /
//!         (ν̂^{(q+1)/2} (2q I_{(q+1)/2}(2ν̂) + (q+2) ν̂ I_{(q+3)/2}(2ν̂)) n) ]^{1/(q+4)},
//! evaluated entirely in the log domain — the Bessel factors overflow long
//! before the ratio does for concentrated samples. Requires n >= 2;
//! propagates DegenerateConcentration, also for ν̂ ≈ 0 (uniform-like data,
//! where the reference density admits no finite optimum).
BandwidthSelection rot_bandwidth(const Matrix& data, int q);

}  // namespace dirms::bandwidth
