#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dirms/errors.hpp"
#include "dirms/sphere.hpp"

//! Random generation on spheres: uniform, von Mises–Fisher by rejection
//! sampling, finite vMF mixtures with ground-truth labels, and the circular
//! Laplace/von-Mises test mixture.
namespace dirms::sampling {

using sphere::Matrix;
using sphere::Vector;

//! Thrown by the vMF rejection sampler when the measured acceptance rate
//! drops below 1e-6 — the uniform proposal is hopeless at such
//! concentrations and an inversion-based sampler would be required.
class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

//! Deterministic, seedable, platform-independent 64-bit generator
//! (xoshiro256++ with splitmix64 seed expansion). Identical seeds reproduce
//! identical sample streams bit-for-bit across runs and platforms.
//!
//! Each instance is single-threaded; for parallel sampling derive
//! independent streams from one master seed via jump(), which advances the
//! state by 2^128 draws.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  static std::string algorithm() { return "xoshiro256++"; }

  //! Next raw 64-bit word.
  std::uint64_t next_u64();

  //! Uniform double in [0, 1), using the top 53 bits.
  double uniform01();

  //! Uniform double in (0, 1] — safe as a logarithm argument.
  double uniform_open0();

  //! Standard normal deviate (Box–Muller; consumes two uniforms per pair,
  //! caching the second).
  double normal();

  //! Jumps the state forward by 2^128 draws, yielding a stream independent
  //! of the original for any practical sample count.
  void jump();

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

//! One vMF mixture component.
struct MixtureComponent {
  sphere::UnitVector mu;
  double nu = 0.0;
  double weight = 0.0;
};

//! A finite von Mises–Fisher mixture on S^q. Weights must be nonnegative
//! and sum to 1 within 1e-12; all means must live on the same sphere.
struct MixtureSpec {
  std::vector<MixtureComponent> components;
  int q = 0;

  //! Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

//! n i.i.d. points uniform on S^q (normalized standard Gaussians), one per
//! row. n = 0 yields an empty matrix.
Matrix sample_uniform_sphere(int q, Eigen::Index n, SeededRng& rng);

//! n i.i.d. draws from vMF(mu, nu) by rejection sampling with the uniform
//! proposal: a candidate z is accepted with probability exp(ν(μᵀz − 1)).
//! Faithful to that textbook scheme rather than fast; throws
//! RejectionBudgetExceeded when the running acceptance rate falls below
//! 1e-6 (extremely large ν).
Matrix sample_vmf(const sphere::UnitVector& mu, double nu, Eigen::Index n, SeededRng& rng);

//! n draws from a vMF mixture together with the generating component index
//! of every row — the ground truth that misclassification rates are
//! measured against.
struct LabeledSample {
  Matrix points;
  std::vector<int> labels;
};
LabeledSample sample_mixture(const MixtureSpec& spec, Eigen::Index n, SeededRng& rng);

//! n angles in [−π, π) from the circular test mixture: with probability ½ a
//! Laplace(0, 1) variate truncated to [−π, π] (drawn by inverse CDF), else a
//! von Mises(π/2, 6) variate (drawn by rejection). Its two local modes are
//! at 0 and π/2.
std::vector<double> sample_circular_f1(Eigen::Index n, SeededRng& rng);

//! Labeled variant of sample_circular_f1: the same angle stream plus the
//! generating component of every draw (0 = truncated Laplace, 1 = von
//! Mises). Identical seeds give identical angles in both functions.
struct LabeledAngles {
  std::vector<double> angles;
  std::vector<int> labels;
};
LabeledAngles sample_circular_f1_labeled(Eigen::Index n, SeededRng& rng);

//! Embeds angles as rows (cos θ, sin θ) on S¹.
Matrix embed_angles(const std::vector<double>& angles);

//! Density of the circular test mixture at angle θ ∈ [−π, π] (uniform
//! measure on the circle parametrized by arc length).
double circular_f1_density(double theta);

}  // namespace dirms::sampling
