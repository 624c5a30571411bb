#include "dirms/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dirms/meanshift.hpp"

namespace dirms::oracles {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_step(double step) {
  if (!(step >= 1e-7) || !(step <= 1e-3)) {
    throw std::invalid_argument("finite-difference step must lie in [1e-7, 1e-3]");
  }
}

//! Polishes each strict grid maximum with 20 mean-shift steps, then merges
//! candidates within 1e-2 radians (highest-density representative).
std::vector<sphere::UnitVector> refine_candidates(const kde::KdeModel& model,
                                                  std::vector<sphere::UnitVector> candidates) {
  std::vector<sphere::UnitVector> refined;
  refined.reserve(candidates.size());
  for (auto& start : candidates) {
    sphere::UnitVector y = start;
    for (int s = 0; s < 20; ++s) {
      try {
        y = meanshift::ms_step(model, y);
      } catch (const meanshift::DegenerateStep&) {
        break;
      }
    }
    refined.push_back(y);
  }

  std::vector<sphere::UnitVector> modes;
  std::vector<double> mode_density;
  const double cos_threshold = std::cos(1e-2);
  for (const auto& point : refined) {
    const double dens = kde::density(model, point);
    bool merged = false;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (point.dot(modes[k]) >= cos_threshold) {
        if (dens > mode_density[k]) {
          modes[k] = point;
          mode_density[k] = dens;
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      modes.push_back(point);
      mode_density.push_back(dens);
    }
  }
  return modes;
}

std::vector<sphere::UnitVector> circle_grid_modes(const kde::KdeModel& model, int resolution) {
  std::vector<double> density(static_cast<std::size_t>(resolution));
  std::vector<sphere::UnitVector> points;
  points.reserve(static_cast<std::size_t>(resolution));
  for (int k = 0; k < resolution; ++k) {
    const double theta = -kPi + 2.0 * kPi * k / resolution;
    Vector x(2);
    x << std::cos(theta), std::sin(theta);
    points.emplace_back(x);
    density[static_cast<std::size_t>(k)] = kde::density(model, points.back());
  }
  std::vector<sphere::UnitVector> candidates;
  for (int k = 0; k < resolution; ++k) {
    const double here = density[static_cast<std::size_t>(k)];
    const double left = density[static_cast<std::size_t>((k + resolution - 1) % resolution)];
    const double right = density[static_cast<std::size_t>((k + 1) % resolution)];
    if (here > left && here > right) candidates.push_back(points[static_cast<std::size_t>(k)]);
  }
  return refine_candidates(model, std::move(candidates));
}

std::vector<sphere::UnitVector> sphere_grid_modes(const kde::KdeModel& model, int resolution) {
  const int lon_count = resolution;        // wraps around
  const int lat_count = resolution;        // includes both poles
  auto lon_of = [&](int i) { return -180.0 + 360.0 * i / lon_count; };
  auto lat_of = [&](int j) { return -90.0 + 180.0 * j / (lat_count - 1); };

  // Interior rows j = 1..lat_count−2; the pole rows collapse to one point each.
  Matrix density(lon_count, lat_count);
  for (int i = 0; i < lon_count; ++i) {
    for (int j = 1; j + 1 < lat_count; ++j) {
      density(i, j) = kde::density(model, sphere::lonlat_to_unit(lon_of(i), lat_of(j)));
    }
  }
  const sphere::UnitVector south = sphere::lonlat_to_unit(0.0, -90.0);
  const sphere::UnitVector north = sphere::lonlat_to_unit(0.0, 90.0);
  const double south_density = kde::density(model, south);
  const double north_density = kde::density(model, north);

  std::vector<sphere::UnitVector> candidates;
  for (int i = 0; i < lon_count; ++i) {
    const int left = (i + lon_count - 1) % lon_count;
    const int right = (i + 1) % lon_count;
    for (int j = 1; j + 1 < lat_count; ++j) {
      const double here = density(i, j);
      bool strict_max = here > density(left, j) && here > density(right, j);
      for (int dj : {-1, 1}) {
        if (!strict_max) break;
        const int jj = j + dj;
        if (jj == 0) {
          strict_max = here > south_density;
        } else if (jj == lat_count - 1) {
          strict_max = here > north_density;
        } else {
          strict_max = here > density(left, jj) && here > density(i, jj) &&
                       here > density(right, jj);
        }
      }
      if (strict_max) candidates.push_back(sphere::lonlat_to_unit(lon_of(i), lat_of(j)));
    }
  }
  bool south_max = true;
  bool north_max = true;
  for (int i = 0; i < lon_count; ++i) {
    south_max = south_max && south_density > density(i, 1);
    north_max = north_max && north_density > density(i, lat_count - 2);
  }
  if (south_max) candidates.push_back(south);
  if (north_max) candidates.push_back(north);

  return refine_candidates(model, std::move(candidates));
}

}  // namespace

void GridSpec::validate() const {
  if (q < 1) throw std::invalid_argument("GridSpec: q must be positive");
  if (q > 2) {
    throw DimensionTooLarge("GridSpec: grid mode search covers only S^1 and S^2");
  }
  if (resolution < 16) throw std::invalid_argument("GridSpec: resolution must be >= 16");
}

Vector fd_gradient(const kde::KdeModel& model, const Vector& x, double step) {
  check_step(step);
  const Eigen::Index d = x.size();
  Vector grad(d);
  Vector probe = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    probe(i) = x(i) + step;
    const double up = kde::density_alt(model, probe);
    probe(i) = x(i) - step;
    const double down = kde::density_alt(model, probe);
    probe(i) = x(i);
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

Matrix fd_hessian(const kde::KdeModel& model, const Vector& x, double step) {
  check_step(step);
  const Eigen::Index d = x.size();
  Matrix hess(d, d);
  const double at_x = kde::density_alt(model, x);
  Vector probe = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    probe(i) = x(i) + step;
    const double up = kde::density_alt(model, probe);
    probe(i) = x(i) - step;
    const double down = kde::density_alt(model, probe);
    probe(i) = x(i);
    hess(i, i) = (up - 2.0 * at_x + down) / (step * step);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      probe(i) = x(i) + step;
      probe(j) = x(j) + step;
      const double pp = kde::density_alt(model, probe);
      probe(j) = x(j) - step;
      const double pm = kde::density_alt(model, probe);
      probe(i) = x(i) - step;
      const double mm = kde::density_alt(model, probe);
      probe(j) = x(j) + step;
      const double mp = kde::density_alt(model, probe);
      probe(i) = x(i);
      probe(j) = x(j);
      const double mixed = (pp - pm - mp + mm) / (4.0 * step * step);
      hess(i, j) = mixed;
      hess(j, i) = mixed;
    }
  }
  return hess;
}

std::vector<sphere::UnitVector> grid_modes(const kde::KdeModel& model, const GridSpec& grid) {
  grid.validate();
  if (model.q() > 2) {
    throw DimensionTooLarge("grid_modes: brute-force search covers only S^1 and S^2");
  }
  if (grid.q != model.q()) {
    throw std::invalid_argument("grid_modes: grid dimension does not match the model");
  }
  return grid.q == 1 ? circle_grid_modes(model, grid.resolution)
                     : sphere_grid_modes(model, grid.resolution);
}

void legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 2) throw std::invalid_argument("legendre_rule: need at least 2 nodes");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, then Newton on the Legendre recurrence.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

double sphere_integral(const std::function<double(const Vector&)>& fn, int q, int n_nodes) {
  if (q < 1 || q > 3) {
    throw DimensionTooLarge("sphere_integral: product quadrature covers q in {1, 2, 3}");
  }
  if (n_nodes < 2) throw std::invalid_argument("sphere_integral: n_nodes must be >= 2");

  if (q == 1) {
    // Periodic trapezoid rule — spectrally accurate for smooth integrands.
    const int m = 4 * n_nodes;
    double total = 0.0;
    Vector x(2);
    for (int k = 0; k < m; ++k) {
      const double theta = 2.0 * kPi * k / m;
      x(0) = std::cos(theta);
      x(1) = std::sin(theta);
      total += fn(x);
    }
    return total * 2.0 * kPi / m;
  }

  // Colatitude substitution t = cos(phi): the weight (1 - t^2)^{q/2 - 1} dt
  // becomes sin(phi)^{q-1} dphi, which is analytic in phi for every q — the
  // plain-t form has a square-root endpoint factor for odd q that degrades
  // Gauss–Legendre to algebraic convergence.
  std::vector<double> nodes;
  std::vector<double> weights;
  legendre_rule(n_nodes, nodes, weights);
  double total = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double phi = 0.5 * kPi * (nodes[static_cast<std::size_t>(i)] + 1.0);
    const double t = std::cos(phi);
    const double sine = std::sin(phi);
    auto slice = [&](const Vector& xi) {
      Vector x(xi.size() + 1);
      x(0) = t;
      x.tail(xi.size()) = sine * xi;
      return fn(x);
    };
    const double factor = std::pow(sine, q - 1) * 0.5 * kPi;
    total += weights[static_cast<std::size_t>(i)] * factor * sphere_integral(slice, q - 1, n_nodes);
  }
  return total;
}

}  // namespace dirms::oracles
