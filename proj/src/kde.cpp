#include "dirms/kde.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "dirms/linalg.hpp"

namespace dirms::kde {

namespace {

using Eigen::ArrayXd;

bool is_von_mises(const kernels::DirectionalKernel& kernel) { return kernel.name == "von_mises"; }

//! Kernel arguments rᵢ = (1 − xᵀXᵢ)/h² for an on-sphere query.
ArrayXd sphere_args(const KdeModel& model, const Vector& x) {
  return (1.0 - (model.data() * x).array()) / (model.h() * model.h());
}

//! Kernel arguments sᵢ = ½‖(x − Xᵢ)/h‖², expanded through the dot product
//! (every data row is unit, so ‖x − Xᵢ‖² = ‖x‖² + 1 − 2 xᵀXᵢ).
ArrayXd alt_args(const KdeModel& model, const Vector& x) {
  const double self = 0.5 * (x.squaredNorm() + 1.0);
  return (self - (model.data() * x).array()) / (model.h() * model.h());
}

//! Fills `out` with log-domain weights for `hook` applied to `args`;
//! returns false when the kernel carries no such hook. The von Mises
//! profile is recognized by name so the whole array is one vectorized
//! negation instead of n std::function calls.
bool fill_log_weights(const kernels::DirectionalKernel& kernel,
                      const std::function<double(double)>& hook, const ArrayXd& args,
                      ArrayXd& out) {
  if (is_von_mises(kernel)) {
    out = -args;
    return true;
  }
  if (!hook) return false;
  out.resize(args.size());
  for (Eigen::Index i = 0; i < args.size(); ++i) out(i) = hook(args(i));
  return true;
}

ArrayXd apply(const std::function<double(double)>& f, const ArrayXd& args) {
  ArrayXd out(args.size());
  for (Eigen::Index i = 0; i < args.size(); ++i) out(i) = f(args(i));
  return out;
}

//! (c/n)·Σᵢ exp(log_wᵢ), accumulated log-sum-exp style. Returns exactly 0
//! when the true value is below the double range.
double stabilized_sum(const KdeModel& model, const ArrayXd& log_w) {
  const double m = log_w.maxCoeff();
  if (!std::isfinite(m)) return 0.0;
  const double total = (log_w - m).exp().sum();
  const double log_value = std::log(model.norm_const().value) -
                           std::log(static_cast<double>(model.n())) + m + std::log(total);
  return std::exp(log_value);
}

}  // namespace

KdeModel::KdeModel(Matrix data, double h, kernels::DirectionalKernel kernel)
    : KdeModel(std::move(data), h, kernel, kernels::NormalizingConstant{}) {
  norm_ = kernels::normalizing_constant(kernel_, h_, q());
}

KdeModel::KdeModel(Matrix data, double h, kernels::DirectionalKernel kernel,
                   kernels::NormalizingConstant precomputed)
    : data_(std::move(data)), h_(h), kernel_(std::move(kernel)), norm_(precomputed) {
  if (data_.rows() < 1) throw std::invalid_argument("KdeModel: need at least one observation");
  if (data_.cols() < 2) throw std::invalid_argument("KdeModel: ambient dimension must be >= 2");
  if (!(h_ > 0.0)) throw std::invalid_argument("KdeModel: bandwidth must be > 0");
  if (!kernel_.eval || !kernel_.deriv) {
    throw kernels::InvalidKernel("KdeModel: kernel must provide eval and deriv");
  }
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    if (std::abs(data_.row(i).norm() - 1.0) > 1e-10) {
      throw std::invalid_argument("KdeModel: row " + std::to_string(i) +
                                  " is not unit length to 1e-10");
    }
  }
  if (norm_.value > 0.0 && (norm_.h != h_ || norm_.q != q())) {
    throw std::invalid_argument("KdeModel: precomputed normalizing constant is for different h or q");
  }
}

double density(const KdeModel& model, const sphere::UnitVector& x) {
  if (x.dim() != model.data().cols()) {
    throw sphere::WrongDimensionError("density: query dimension mismatch");
  }
  const ArrayXd args = sphere_args(model, x.coords());
  ArrayXd log_w;
  if (fill_log_weights(model.kernel(), model.kernel().log_eval, args, log_w)) {
    return stabilized_sum(model, log_w);
  }
  const double total = apply(model.kernel().eval, args).sum();
  return model.norm_const().value / static_cast<double>(model.n()) * total;
}

double density_alt(const KdeModel& model, const Vector& x) {
  if (x.size() != model.data().cols()) {
    throw sphere::WrongDimensionError("density_alt: query dimension mismatch");
  }
  if (!(x.norm() > 0.0)) throw std::invalid_argument("density_alt: query must be nonzero");
  const ArrayXd args = alt_args(model, x);
  ArrayXd log_w;
  if (fill_log_weights(model.kernel(), model.kernel().log_eval, args, log_w)) {
    return stabilized_sum(model, log_w);
  }
  const double total = apply(model.kernel().eval, args).sum();
  return model.norm_const().value / static_cast<double>(model.n()) * total;
}

Vector total_gradient_hat(const KdeModel& model, const sphere::UnitVector& x) {
  if (x.dim() != model.data().cols()) {
    throw sphere::WrongDimensionError("total_gradient_hat: query dimension mismatch");
  }
  const ArrayXd args = sphere_args(model, x.coords());
  const double h = model.h();
  const double n = static_cast<double>(model.n());
  ArrayXd log_w;
  if (fill_log_weights(model.kernel(), model.kernel().log_abs_deriv, args, log_w)) {
    const double m = log_w.maxCoeff();
    if (!std::isfinite(m)) return Vector::Zero(x.dim());
    const ArrayXd u = (log_w - m).exp();
    // −Σ Xᵢ L′ = Σ Xᵢ |L′| for decreasing kernels; the common factor e^m is
    // folded into the scalar so it can underflow to 0 without poisoning the
    // direction computed by shift_numerator.
    const double scale = std::exp(std::log(model.norm_const().value) - std::log(n) -
                                  2.0 * std::log(h) + m);
    return scale * (model.data().transpose() * u.matrix());
  }
  const ArrayXd w = apply(model.kernel().deriv, args);
  const double factor = -model.norm_const().value / (n * h * h);
  return factor * (model.data().transpose() * w.matrix());
}

Vector total_gradient_alt(const KdeModel& model, const Vector& x) {
  if (x.size() != model.data().cols()) {
    throw sphere::WrongDimensionError("total_gradient_alt: query dimension mismatch");
  }
  if (!(x.norm() > 0.0)) throw std::invalid_argument("total_gradient_alt: query must be nonzero");
  const ArrayXd args = alt_args(model, x);
  const double h = model.h();
  const double n = static_cast<double>(model.n());
  ArrayXd log_w;
  if (fill_log_weights(model.kernel(), model.kernel().log_abs_deriv, args, log_w)) {
    const double m = log_w.maxCoeff();
    if (!std::isfinite(m)) return Vector::Zero(x.size());
    const ArrayXd t = (log_w - m).exp();
    const double scale = std::exp(std::log(model.norm_const().value) - std::log(n) -
                                  2.0 * std::log(h) + m);
    // Σ L′·(x − Xᵢ) with L′ = −e^m·tᵢ becomes e^m·(Xᵀt − (Σt)·x).
    return scale * ((model.data().transpose() * t.matrix()) - t.sum() * x);
  }
  const ArrayXd w = apply(model.kernel().deriv, args);
  const double factor = model.norm_const().value / (n * h * h);
  return factor * (w.sum() * x - (model.data().transpose() * w.matrix()));
}

sphere::TangentVector riemannian_gradient(const KdeModel& model, const sphere::UnitVector& x) {
  return sphere::tangent_project(x, total_gradient_hat(model, x));
}

double radial_gradient_magnitude(const KdeModel& model, const sphere::UnitVector& x) {
  return x.coords().dot(total_gradient_hat(model, x));
}

Vector shift_numerator(const KdeModel& model, const sphere::UnitVector& x) {
  if (x.dim() != model.data().cols()) {
    throw sphere::WrongDimensionError("shift_numerator: query dimension mismatch");
  }
  const ArrayXd args = sphere_args(model, x.coords());
  ArrayXd log_w;
  if (fill_log_weights(model.kernel(), model.kernel().log_abs_deriv, args, log_w)) {
    const double m = log_w.maxCoeff();
    if (!std::isfinite(m)) return Vector::Zero(x.dim());
    const ArrayXd u = (log_w - m).exp();
    return model.data().transpose() * u.matrix();
  }
  const ArrayXd w = apply(model.kernel().deriv, args);
  return -(model.data().transpose() * w.matrix());
}

HessianReport riemannian_hessian(const KdeModel& model, const sphere::UnitVector& x) {
  if (x.dim() != model.data().cols()) {
    throw sphere::WrongDimensionError("riemannian_hessian: query dimension mismatch");
  }
  if (!model.kernel().deriv2) {
    throw KernelNotC2("riemannian_hessian: kernel '" + model.kernel().name +
                      "' has no second derivative");
  }
  const Eigen::Index d = model.data().cols();
  const double h = model.h();
  const double h2 = h * h;
  const double n = static_cast<double>(model.n());
  const double c = model.norm_const().value;
  const ArrayXd args = sphere_args(model, x.coords());

  ArrayXd w1;  // L′(rᵢ)
  ArrayXd w2;  // L″(rᵢ)
  if (is_von_mises(model.kernel())) {
    w2 = (-args).exp();
    w1 = -w2;
  } else {
    w1 = apply(model.kernel().deriv, args);
    w2 = apply(model.kernel().deriv2, args);
  }

  const ArrayXd cosines = (model.data() * x.coords()).array();
  const double iso = c / (n * h2) * (cosines * w1).sum();
  const Matrix weighted = (model.data().array().colwise() * w2).matrix();
  Matrix m = (c / (n * h2 * h2)) * (weighted.transpose() * model.data());
  m.diagonal().array() += iso;

  const Matrix p = Matrix::Identity(d, d) - x.coords() * x.coords().transpose();
  Matrix hess = p * m * p;
  hess = 0.5 * (hess + hess.transpose().eval());

  const sphere::TangentBasis basis = sphere::tangent_basis(x);
  const Matrix projected =
      basis.columns.transpose() * hess * basis.columns;  // q×q, symmetric
  const linalg::SymmetricEigen eig = linalg::jacobi_eigen(projected);

  HessianReport report;
  report.matrix = std::move(hess);
  report.tangent_eigenvalues = eig.values;
  report.tangent_eigenvectors.reserve(static_cast<std::size_t>(eig.values.size()));
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    report.tangent_eigenvectors.emplace_back(x, basis.columns * eig.vectors.col(j));
  }
  return report;
}

}  // namespace dirms::kde
