#include "dirms/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dirms/kernels.hpp"

namespace dirms::bandwidth {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

//! log(e^a + e^b) without overflow.
double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double mean_resultant_length(const Matrix& data) {
  if (data.rows() < 1) {
    throw std::invalid_argument("mean_resultant_length: need at least one observation");
  }
  return data.colwise().sum().norm() / static_cast<double>(data.rows());
}

double concentration_estimate(double r_bar, int q) {
  if (q < 1) throw std::invalid_argument("concentration_estimate: q must be >= 1");
  if (r_bar < 0.0 || r_bar > 1.0) {
    throw std::invalid_argument("concentration_estimate: r_bar must lie in [0, 1]");
  }
  if (r_bar >= 1.0 - 1e-12) {
    throw DegenerateConcentration(
        "concentration_estimate: mean resultant length is 1 to machine precision (all points "
        "coincide); supply a bandwidth manually");
  }
  return r_bar * (q + 1 - r_bar * r_bar) / (1.0 - r_bar * r_bar);
}

BandwidthSelection rot_bandwidth(const Matrix& data, int q) {
  if (q < 1) throw std::invalid_argument("rot_bandwidth: q must be >= 1");
  if (data.cols() != q + 1) {
    throw std::invalid_argument("rot_bandwidth: data must have q+1 columns");
  }
  if (data.rows() < 2) throw std::invalid_argument("rot_bandwidth: need at least two observations");

  BandwidthSelection sel;
  sel.n = data.rows();
  sel.q = q;
  sel.r_bar = mean_resultant_length(data);
  sel.nu_hat = concentration_estimate(sel.r_bar, q);
  if (sel.nu_hat <= 1e-12) {
    throw DegenerateConcentration(
        "rot_bandwidth: estimated concentration is ~0 (uniform-like data); the reference density "
        "admits no finite optimal bandwidth, supply one manually");
  }

  const double nu = sel.nu_hat;
  const double log_num = std::log(4.0) + 0.5 * std::log(kPi) +
                         2.0 * kernels::log_bessel_i(0.5 * (q - 1), nu);
  const double log_bracket =
      log_add_exp(std::log(2.0 * q) + kernels::log_bessel_i(0.5 * (q + 1), 2.0 * nu),
                  std::log((q + 2.0) * nu) + kernels::log_bessel_i(0.5 * (q + 3), 2.0 * nu));
  const double log_den = 0.5 * (q + 1) * std::log(nu) + log_bracket +
                         std::log(static_cast<double>(sel.n));
  sel.h = std::exp((log_num - log_den) / (q + 4));
  return sel;
}

}  // namespace dirms::bandwidth
