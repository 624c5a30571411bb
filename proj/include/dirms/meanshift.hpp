#pragma once

#include <cstdint>
#include <vector>

#include "dirms/errors.hpp"
#include "dirms/kde.hpp"
#include "dirms/sphere.hpp"

//! The directional mean-shift engine: single fixed-point steps, full
//! convergence runs, mode clustering with mode merging, the blurring
//! variant, a fixed-step Riemannian gradient-ascent variant, and
//! clustering-quality metrics.
namespace dirms::meanshift {

using sphere::Matrix;
using sphere::Vector;

//! Label value for points that did not converge to any mode.
inline constexpr int kUnassigned = -1;

//! Thrown by ms_step when the weighted data sum cancels to (numerically)
//! zero — perfectly antipodal-symmetric weights. A hard per-point failure,
//! never a silent skip: the fixed-point map is undefined there.
class DegenerateStep : public Error {
 public:
  using Error::Error;
};

//! Thrown by adaptive_step_size at critical points, where no step size can
//! reproduce the fixed-point update.
class ZeroGradient : public Error {
 public:
  using Error::Error;
};

//! Thrown by hausdorff_distance when either mode set is empty.
class EmptySet : public Error {
 public:
  using Error::Error;
};

//! Iteration controls shared by all mean-shift drivers.
struct MsConfig {
  double tol = 1e-7;        //!< stop once 1 − ŷ_{s+1}ᵀŷ_s <= tol
  int max_iter = 1000;      //!< per-point iteration cap (sweep cap when blurring)
  double merge_tol = 1e-2;  //!< single-linkage mode-merging radius, radians
  bool record_trace = false;  //!< keep per-point paths in ModeClustering
  int threads = 1;            //!< worker threads for batch runs (results identical)

  //! Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

//! The trajectory of one mean-shift (or gradient-ascent) run: every visited
//! point with its density. For the fixed-point iteration with a valid
//! kernel the density sequence is non-decreasing (up to 1e-12 slack).
struct ModePath {
  std::vector<sphere::UnitVector> points;  //!< y_0, y_1, …, terminal
  std::vector<double> densities;           //!< KDE value at each point
  bool converged = false;                  //!< tolerance reached within max_iter
  int iterations = 0;                      //!< steps taken (= points.size() − 1)
};

//! Result of clustering a batch of query points by the mode their
//! mean-shift path converges to.
struct ModeClustering {
  std::vector<sphere::UnitVector> modes;  //!< merged mode representatives
  std::vector<int> labels;                //!< per query point; kUnassigned when not converged
  std::vector<int> iterations;            //!< per-point step count (sweeps when blurring)
  std::vector<std::uint8_t> converged;    //!< per-point convergence flag
  std::vector<ModePath> paths;            //!< filled only when config.record_trace
  MsConfig config;                        //!< echo of the controls used
  int steps = 0;  //!< max per-point iterations (plain) or sweep count (blurring)
};

//! One fixed-point update: the weighted sample mean
//! −Σᵢ Xᵢ L′((1−yᵀXᵢ)/h²) normalized to the sphere, which equals
//! ∇f̂_h(y)/‖∇f̂_h(y)‖₂. Stabilized against underflow via the factored
//! weights of the estimators module. Throws DegenerateStep when the sum
//! cancels to numerically zero.
sphere::UnitVector ms_step(const kde::KdeModel& model, const sphere::UnitVector& y);

//! Iterates ms_step from y0 until 1 − ŷ_{s+1}ᵀŷ_s <= config.tol or
//! config.max_iter is reached (converged=false, partial path returned).
//! DegenerateStep propagates.
ModePath ms_converge(const kde::KdeModel& model, const sphere::UnitVector& y0,
                     const MsConfig& config);

//! The adaptive step size η̂ = θ̂ / (sin θ̂ · ‖∇f̂_h(y)‖₂) — the unique scale
//! for which exp_map(y, η̂·riemannian_gradient(y)) reproduces ms_step(y)
//! exactly (θ̂ is the angle between y and ms_step(y)). Throws ZeroGradient
//! when the gradient vanishes.
double adaptive_step_size(const kde::KdeModel& model, const sphere::UnitVector& y);

//! Riemannian gradient ascent with a fixed step:
//! y_{s+1} = exp_map(y_s, eta·riemannian_gradient(y_s)), same stopping rule
//! as ms_converge. eta = 0 yields a constant path that stops immediately.
ModePath gradient_ascent_fixed_step(const kde::KdeModel& model, const sphere::UnitVector& y0,
                                    double eta, const MsConfig& config);

//! Runs ms_converge from every row of query_points (commonly the data
//! itself) and merges the terminal points of converged runs into modes by
//! single-linkage at geodesic distance config.merge_tol. The mode
//! representative is the terminal with the highest density in its merge
//! group (ties: lowest point index); modes are ordered by first appearance.
//! Per-point failures (no convergence, degenerate steps) are recorded as
//! kUnassigned and never abort the batch.
ModeClustering cluster(const kde::KdeModel& model, const Matrix& query_points,
                       const MsConfig& config);

//! Blurring variant: every sweep moves ALL current points by one ms_step
//! under the KDE built on the current point set (the normalizing constant
//! is reused — it depends only on h, q and the kernel). With per-point
//! displacements e_i = ‖y_i^{(s)} − y_i^{(s+1)}‖₂, sweeps stop when the
//! Shannon entropy of the displacement histogram stabilizes,
//! |H(e^{(s+1)}) − H(e^{(s)})| <= 1e-8, or when mean(e) <= config.tol. The
//! histogram uses ⌈0.9·n⌉ equal-width bins spanning [0, max(e)]. Final
//! points are merged into modes exactly as in cluster().
ModeClustering blurring_dms(const Matrix& data, double h,
                            const kernels::DirectionalKernel& kernel, const MsConfig& config);

//! Fraction of points whose cluster, after greedy maximum-overlap matching
//! of clusters to truth components, does not correspond to their true
//! component. kUnassigned always counts as an error. Clusters are processed
//! in decreasing size order (ties: lower index) and matched to the unused
//! component with the largest overlap (ties: lower index); zero-overlap
//! clusters stay unmatched.
double misclassification_rate(const std::vector<int>& labels, const std::vector<int>& truth);

//! Contingency counts under the same greedy matching. Row j < C holds the
//! per-component counts of the cluster matched to truth component j (an
//! all-zero row when no cluster matched j); any unmatched clusters follow
//! as extra rows in cluster-index order; a final row collects kUnassigned
//! points when present. Columns are truth components 0..C−1.
Eigen::MatrixXi confusion_matrix(const std::vector<int>& labels, const std::vector<int>& truth);

//! Hausdorff distance max(max_a min_b ‖a−b‖₂, max_b min_a ‖a−b‖₂) between
//! two finite sets of sphere points, in the ambient chord metric. Throws
//! EmptySet when either set is empty.
double hausdorff_distance(const std::vector<sphere::UnitVector>& a,
                          const std::vector<sphere::UnitVector>& b);

}  // namespace dirms::meanshift
