#include "dirms/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "dirms/kernels.hpp"

namespace dirms::sampling {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15uLL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9uLL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebuLL;
  return z ^ (z >> 31);
}

//! Tracks rejection-sampler throughput and aborts hopeless runs.
struct RejectionBudget {
  std::uint64_t attempts = 0;
  std::uint64_t accepts = 0;

  void attempt() {
    ++attempts;
    if (attempts % 1000000 == 0 &&
        static_cast<double>(accepts) < 1e-6 * static_cast<double>(attempts)) {
      throw RejectionBudgetExceeded(
          "sample_vmf: acceptance rate below 1e-6; the uniform proposal cannot serve this "
          "concentration — use an inversion-based sampler for nu this large");
    }
  }
  void accept() { ++accepts; }
};

//! One uniform draw on S^q (normalized standard Gaussians).
Vector uniform_draw(int q, SeededRng& rng) {
  Vector point(q + 1);
  while (true) {
    for (int j = 0; j <= q; ++j) point(j) = rng.normal();
    const double norm = point.norm();
    if (norm > 1e-12) {
      point /= norm;
      return point;
    }
  }
}

//! One vMF(mu, nu) draw by uniform-proposal rejection.
Vector vmf_draw(const Vector& mu, double nu, SeededRng& rng, RejectionBudget& budget) {
  const int q = static_cast<int>(mu.size()) - 1;
  if (nu == 0.0) return uniform_draw(q, rng);
  while (true) {
    budget.attempt();
    Vector candidate = uniform_draw(q, rng);
    const double log_accept = nu * (candidate.dot(mu) - 1.0);
    if (std::log(rng.uniform_open0()) <= log_accept) {
      budget.accept();
      return candidate;
    }
  }
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double SeededRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform_open0() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_open0();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * kPi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

void SeededRng::jump() {
  static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                            0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
  std::uint64_t acc[4] = {0, 0, 0, 0};
  for (std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (1ULL << b)) {
        for (int i = 0; i < 4; ++i) acc[i] ^= state_[i];
      }
      next_u64();
    }
  }
  for (int i = 0; i < 4; ++i) state_[i] = acc[i];
  has_cached_normal_ = false;
}

void MixtureSpec::validate() const {
  if (q < 1) throw std::invalid_argument("MixtureSpec: q must be >= 1");
  if (components.empty()) throw std::invalid_argument("MixtureSpec: needs at least one component");
  double total = 0.0;
  for (const auto& comp : components) {
    if (comp.mu.dim() != q + 1) {
      throw std::invalid_argument("MixtureSpec: component mean has wrong dimension");
    }
    if (comp.nu < 0.0) throw std::invalid_argument("MixtureSpec: concentration must be >= 0");
    if (comp.weight < 0.0) throw std::invalid_argument("MixtureSpec: weights must be >= 0");
    total += comp.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MixtureSpec: weights must sum to 1 within 1e-12");
  }
}

Matrix sample_uniform_sphere(int q, Eigen::Index n, SeededRng& rng) {
  if (q < 1) throw std::invalid_argument("sample_uniform_sphere: q must be >= 1");
  if (n < 0) throw std::invalid_argument("sample_uniform_sphere: n must be >= 0");
  Matrix out(n, q + 1);
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = uniform_draw(q, rng).transpose();
  return out;
}

Matrix sample_vmf(const sphere::UnitVector& mu, double nu, Eigen::Index n, SeededRng& rng) {
  if (nu < 0.0) throw std::invalid_argument("sample_vmf: nu must be >= 0");
  if (n < 0) throw std::invalid_argument("sample_vmf: n must be >= 0");
  Matrix out(n, mu.dim());
  RejectionBudget budget;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i) = vmf_draw(mu.coords(), nu, rng, budget).transpose();
  }
  return out;
}

LabeledSample sample_mixture(const MixtureSpec& spec, Eigen::Index n, SeededRng& rng) {
  spec.validate();
  if (n < 0) throw std::invalid_argument("sample_mixture: n must be >= 0");
  LabeledSample sample;
  sample.points.resize(n, spec.q + 1);
  sample.labels.resize(static_cast<std::size_t>(n));
  RejectionBudget budget;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    int pick = static_cast<int>(spec.components.size()) - 1;
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
      cumulative += spec.components[k].weight;
      if (u < cumulative) {
        pick = static_cast<int>(k);
        break;
      }
    }
    const auto& comp = spec.components[static_cast<std::size_t>(pick)];
    sample.points.row(i) = vmf_draw(comp.mu.coords(), comp.nu, rng, budget).transpose();
    sample.labels[static_cast<std::size_t>(i)] = pick;
  }
  return sample;
}

LabeledAngles sample_circular_f1_labeled(Eigen::Index n, SeededRng& rng) {
  if (n < 0) throw std::invalid_argument("sample_circular_f1_labeled: n must be >= 0");
  LabeledAngles out;
  out.angles.resize(static_cast<std::size_t>(n));
  out.labels.resize(static_cast<std::size_t>(n));
  const double z = 2.0 * (1.0 - std::exp(-kPi));  // truncated-Laplace mass
  for (std::size_t i = 0; i < out.angles.size(); ++i) {
    double theta = 0.0;
    const bool laplace = rng.uniform01() < 0.5;
    if (laplace) {
      // Laplace(0,1) truncated to [−π, π] by inverse CDF.
      const double v = rng.uniform01();
      theta = (v <= 0.5) ? std::log(v * z + std::exp(-kPi))
                         : -std::log(2.0 - std::exp(-kPi) - v * z);
    } else {
      // von Mises(π/2, 6) by uniform-proposal rejection.
      while (true) {
        const double candidate = -kPi + 2.0 * kPi * rng.uniform01();
        if (std::log(rng.uniform_open0()) <= 6.0 * (std::cos(candidate - 0.5 * kPi) - 1.0)) {
          theta = candidate;
          break;
        }
      }
    }
    out.angles[i] = theta;
    out.labels[i] = laplace ? 0 : 1;
  }
  return out;
}

std::vector<double> sample_circular_f1(Eigen::Index n, SeededRng& rng) {
  return sample_circular_f1_labeled(n, rng).angles;
}

Matrix embed_angles(const std::vector<double>& angles) {
  Matrix out(static_cast<Eigen::Index>(angles.size()), 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out(i, 0) = std::cos(angles[static_cast<std::size_t>(i)]);
    out(i, 1) = std::sin(angles[static_cast<std::size_t>(i)]);
  }
  return out;
}

double circular_f1_density(double theta) {
  if (theta < -kPi || theta > kPi) return 0.0;
  const double laplace =
      std::exp(-std::abs(theta)) / (2.0 * (1.0 - std::exp(-kPi)));
  const double von_mises = std::exp(6.0 * std::cos(theta - 0.5 * kPi)) /
                           (2.0 * kPi * std::exp(kernels::log_bessel_i(0.0, 6.0)));
  return 0.5 * laplace + 0.5 * von_mises;
}

}  // namespace dirms::sampling
