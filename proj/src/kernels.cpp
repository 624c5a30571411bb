#include "dirms/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dirms::kernels {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

//! 200-node Gauss–Legendre rule on [-1, 1], materialized once from the
//! half-rule tables (the tables store only the nonnegative abscissas).
struct GaussLegendre200 {
  std::vector<double> node;
  std::vector<double> weight;

  GaussLegendre200() {
    using Rule = boost::math::quadrature::gauss<double, 200>;
    const auto& half_nodes = Rule::abscissa();
    const auto& half_weights = Rule::weights();
    for (std::size_t i = 0; i < half_nodes.size(); ++i) {
      node.push_back(half_nodes[i]);
      weight.push_back(half_weights[i]);
      node.push_back(-half_nodes[i]);
      weight.push_back(half_weights[i]);
    }
  }
};

const GaussLegendre200& gl200() {
  static const GaussLegendre200 rule;
  return rule;
}

//! log I_α(ν) from the integral representation
//! I_α(ν) = (ν/2)^α / (√π Γ(α+½)) ∫₀^π (sin φ)^{2α} e^{ν cos φ} dφ,
//! accumulated by log-sum-exp so that large ν cannot overflow.
double log_bessel_integral(double alpha, double nu) {
  const auto& rule = gl200();
  std::vector<double> terms;
  terms.reserve(rule.node.size());
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    const double phi = 0.5 * kPi * (rule.node[i] + 1.0);
    const double log_w = std::log(0.5 * kPi * rule.weight[i]);
    terms.push_back(2.0 * alpha * std::log(std::sin(phi)) + nu * std::cos(phi) + log_w);
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  const double log_integral = m + std::log(acc);
  return alpha * std::log(0.5 * nu) - 0.5 * std::log(kPi) - std::lgamma(alpha + 0.5) +
         log_integral;
}

//! log I_α(ν) from the large-argument asymptotic series
//! I_α(ν) ~ e^ν / √(2πν) · Σ_k (-1)^k a_k(α) / ν^k, summed to its smallest
//! term (the series terminates exactly for half-integer α).
double log_bessel_asymptotic(double alpha, double nu) {
  const double mu = 4.0 * alpha * alpha;
  double term = 1.0;
  double sum = 1.0;
  double prev_abs = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 200; ++k) {
    const double factor = -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * nu);
    term *= factor;
    const double abs_term = std::abs(term);
    if (abs_term >= prev_abs) break;  // divergent tail: truncate at the smallest term
    sum += term;
    if (abs_term < 1e-17 * std::abs(sum)) break;
    prev_abs = abs_term;
  }
  if (!(sum > 0.0)) {
    throw Error("log_bessel_i: asymptotic series lost all significance");
  }
  return nu - 0.5 * std::log(2.0 * kPi * nu) + std::log(sum);
}

}  // namespace

DirectionalKernel von_mises_kernel() {
  DirectionalKernel k;
  k.name = "von_mises";
  k.eval = [](double r) { return std::exp(-r); };
  k.deriv = [](double r) { return -std::exp(-r); };
  k.deriv2 = [](double r) { return std::exp(-r); };
  k.log_eval = [](double r) { return -r; };
  k.log_abs_deriv = [](double r) { return -r; };
  k.log_abs_deriv2 = [](double r) { return -r; };
  validate_kernel(k);
  return k;
}

void validate_kernel(const DirectionalKernel& kernel) {
  if (!kernel.eval || !kernel.deriv) {
    throw InvalidKernel("kernel '" + kernel.name + "' must provide eval and deriv");
  }
  const double at_zero = kernel.eval(0.0);
  if (!std::isfinite(at_zero)) {
    throw InvalidKernel("kernel '" + kernel.name + "' is not finite at r = 0");
  }
  double prev = at_zero;
  for (int i = 0; i <= 200; ++i) {
    const double r = 0.1 * i;
    const double value = kernel.eval(r);
    if (!(value >= 0.0)) {
      throw InvalidKernel("kernel '" + kernel.name + "' is negative at r = " + std::to_string(r));
    }
    if (value > prev + 1e-12 * std::max(1.0, prev)) {
      throw InvalidKernel("kernel '" + kernel.name + "' increases at r = " + std::to_string(r));
    }
    if (kernel.deriv(r) > 0.0) {
      throw InvalidKernel("kernel '" + kernel.name + "' has positive slope at r = " +
                          std::to_string(r));
    }
    prev = value;
  }
}

double surface_area(int q) {
  if (q < 0) throw std::invalid_argument("surface_area: q must be >= 0");
  return 2.0 * std::pow(kPi, 0.5 * (q + 1)) / std::tgamma(0.5 * (q + 1));
}

double lambda_hq(const DirectionalKernel& kernel, double h, int q) {
  if (!(h > 0.0)) throw std::invalid_argument("lambda_hq: h must be > 0");
  if (q < 1) throw std::invalid_argument("lambda_hq: q must be >= 1");
  if (!kernel.eval) throw InvalidKernel("lambda_hq: kernel has no eval");

  // The raw integrand L(r) r^{q/2-1} (2 - r h²)^{q/2-1} on [0, 2h⁻²] has
  // algebraic endpoint singularities whenever q/2 - 1 < 0 is fractional.
  // Split at the midpoint r = h⁻² and apply a square-root substitution on
  // each half; both transformed integrands are smooth for every q >= 1.
  const double half_exp = 0.5 * q - 1.0;
  const double inv_h = 1.0 / h;
  const double h2 = h * h;
  const double inv_h2 = inv_h * inv_h;

  // Left half, r = t²:  ∫₀^{h⁻¹} 2 L(t²) t^{q-1} (2 - t²h²)^{q/2-1} dt.
  auto left = [&](double t) {
    return 2.0 * kernel.eval(t * t) * std::pow(t, q - 1) * std::pow(2.0 - t * t * h2, half_exp);
  };
  // Right half, r = 2h⁻² - u²:
  //   ∫₀^{h⁻¹} 2 h^{q-2} u^{q-1} (2h⁻² - u²)^{q/2-1} L(2h⁻² - u²) du.
  auto right = [&](double u) {
    const double r = 2.0 * inv_h2 - u * u;
    return 2.0 * std::pow(h, q - 2) * std::pow(u, q - 1) * std::pow(r, half_exp) *
           kernel.eval(r);
  };

  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err_left = 0.0;
  double err_right = 0.0;
  const double int_left = Quad::integrate(left, 0.0, inv_h, 15, 1e-11, &err_left);
  const double int_right = Quad::integrate(right, 0.0, inv_h, 15, 1e-11, &err_right);
  const double integral = int_left + int_right;
  const double abs_err = err_left + err_right;
  if (!(integral > 0.0) || !std::isfinite(integral) || abs_err > 1e-9 * integral) {
    throw QuadratureFailure("lambda_hq: quadrature failed to reach relative accuracy 1e-9 (h=" +
                            std::to_string(h) + ", q=" + std::to_string(q) + ")");
  }
  return surface_area(q - 1) * integral;
}

NormalizingConstant normalizing_constant(const DirectionalKernel& kernel, double h, int q) {
  if (!(h > 0.0)) throw std::invalid_argument("normalizing_constant: h must be > 0");
  if (q < 1) throw std::invalid_argument("normalizing_constant: q must be >= 1");

  NormalizingConstant result;
  result.h = h;
  result.q = q;
  if (kernel.name == "von_mises") {
    // Closed form: c_{h,q} = C_q(ν) e^ν with ν = 1/h², evaluated in the log
    // domain where the e^ν factor cancels the Bessel function's growth.
    const double nu = 1.0 / (h * h);
    const double log_cq = 0.5 * (q - 1) * std::log(nu) - 0.5 * (q + 1) * std::log(2.0 * kPi) -
                          log_bessel_i(0.5 * (q - 1), nu);
    result.value = std::exp(log_cq + nu);
    result.method = NormalizationMethod::closed_form;
  } else {
    const double lambda = lambda_hq(kernel, h, q);
    result.value = std::exp(-q * std::log(h) - std::log(lambda));
    result.method = NormalizationMethod::quadrature;
  }
  if (!(result.value > 0.0) || !std::isfinite(result.value)) {
    throw QuadratureFailure("normalizing_constant: non-positive or non-finite value");
  }
  return result;
}

double log_bessel_i(double alpha, double nu) {
  if (alpha < 0.0) throw std::invalid_argument("log_bessel_i: alpha must be >= 0");
  if (nu < 0.0) throw std::invalid_argument("log_bessel_i: nu must be >= 0");
  if (nu == 0.0) {
    return alpha == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (nu <= 50.0) {
    return log_bessel_integral(alpha, nu);
  }
  if (alpha * alpha > nu) {
    // Orders this large relative to the argument sit outside the asymptotic
    // branch's accuracy envelope; nothing in the library gets near this.
    throw Error("log_bessel_i: order too large for the asymptotic branch (alpha=" +
                std::to_string(alpha) + ", nu=" + std::to_string(nu) + ")");
  }
  return log_bessel_asymptotic(alpha, nu);
}

double vmf_log_density(const sphere::UnitVector& x, const sphere::UnitVector& mu, double nu,
                       int q) {
  if (q < 1) throw std::invalid_argument("vmf_log_density: q must be >= 1");
  if (x.dim() != q + 1 || mu.dim() != q + 1) {
    throw sphere::WrongDimensionError("vmf_log_density: x and mu must lie on S^q in R^{q+1}");
  }
  if (nu < 0.0) throw std::invalid_argument("vmf_log_density: nu must be >= 0");
  if (nu == 0.0) {
    return -std::log(surface_area(q));
  }
  const double log_cq = 0.5 * (q - 1) * std::log(nu) - 0.5 * (q + 1) * std::log(2.0 * kPi) -
                        log_bessel_i(0.5 * (q - 1), nu);
  return log_cq + nu * x.dot(mu);
}

}  // namespace dirms::kernels
