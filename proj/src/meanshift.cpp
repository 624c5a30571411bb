#include "dirms/meanshift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"

namespace dirms::meanshift {

namespace {

//! Union-find whose root is always the smallest member index, so merge
//! groups are identified by their first-appearing point.
struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

//! Single-linkage merging of terminal points within merge_tol geodesic
//! distance. Eligible points receive the label of their merge group (groups
//! numbered by first appearance); ineligible points stay kUnassigned. The
//! group representative is its highest-density terminal, ties broken by the
//! lowest point index.
void merge_and_label(const std::vector<Vector>& terminals, const std::vector<double>& densities,
                     const std::vector<std::uint8_t>& eligible, double merge_tol,
                     std::vector<sphere::UnitVector>& modes, std::vector<int>& labels) {
  const int m = static_cast<int>(terminals.size());
  labels.assign(static_cast<std::size_t>(m), kUnassigned);
  modes.clear();

  const double cos_threshold = std::cos(merge_tol);
  UnionFind groups(m);
  for (int i = 0; i < m; ++i) {
    if (!eligible[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < m; ++j) {
      if (!eligible[static_cast<std::size_t>(j)]) continue;
      if (groups.find(i) == groups.find(j)) continue;
      const double dot =
          terminals[static_cast<std::size_t>(i)].dot(terminals[static_cast<std::size_t>(j)]);
      if (dot >= cos_threshold) groups.unite(i, j);
    }
  }

  std::vector<int> root_to_mode(static_cast<std::size_t>(m), -1);
  std::vector<int> representative;
  for (int i = 0; i < m; ++i) {
    if (!eligible[static_cast<std::size_t>(i)]) continue;
    const int root = groups.find(i);
    int mode = root_to_mode[static_cast<std::size_t>(root)];
    if (mode < 0) {
      mode = static_cast<int>(representative.size());
      root_to_mode[static_cast<std::size_t>(root)] = mode;
      representative.push_back(i);
    } else {
      const int rep = representative[static_cast<std::size_t>(mode)];
      if (densities[static_cast<std::size_t>(i)] > densities[static_cast<std::size_t>(rep)]) {
        representative[static_cast<std::size_t>(mode)] = i;
      }
    }
    labels[static_cast<std::size_t>(i)] = mode;
  }

  modes.reserve(representative.size());
  for (int rep : representative) {
    modes.emplace_back(sphere::normalize(terminals[static_cast<std::size_t>(rep)]));
  }
}

//! Shannon entropy of the relative frequencies of e over ⌈0.9·n⌉
//! equal-width bins spanning [0, max(e)]. Zero when every displacement is 0.
double displacement_entropy(const Eigen::ArrayXd& e) {
  const Eigen::Index n = e.size();
  const double max_e = e.maxCoeff();
  if (!(max_e > 0.0)) return 0.0;
  const int bins = static_cast<int>(std::ceil(0.9 * static_cast<double>(n)));
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    int bin = static_cast<int>(e(i) / max_e * bins);
    bin = std::min(bin, bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  double entropy = 0.0;
  for (long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    entropy -= p * std::log(p);
  }
  return entropy;
}

//! Greedy maximum-overlap matching of cluster labels to truth components:
//! clusters in decreasing size order (ties: lower index) grab the unused
//! component they overlap most (ties: lower index); zero-overlap clusters
//! stay unmatched.
struct GreedyMatch {
  int clusters = 0;
  int components = 0;
  std::vector<std::vector<long>> overlap;  // clusters × components
  std::vector<int> match;                  // per cluster: component index or -1
  std::vector<long> unassigned_counts;     // per component, labels == kUnassigned
  long total = 0;
  long matched_correct = 0;
  long unassigned_total = 0;
};

GreedyMatch greedy_match(const std::vector<int>& labels, const std::vector<int>& truth) {
  if (labels.size() != truth.size()) {
    throw std::invalid_argument("label/truth vectors must have equal length");
  }
  if (labels.empty()) throw std::invalid_argument("label/truth vectors must be nonempty");

  GreedyMatch result;
  result.total = static_cast<long>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (truth[i] < 0) throw std::invalid_argument("truth components must be >= 0");
    if (labels[i] < kUnassigned) throw std::invalid_argument("labels must be >= -1");
    result.components = std::max(result.components, truth[i] + 1);
    result.clusters = std::max(result.clusters, labels[i] + 1);
  }

  result.overlap.assign(static_cast<std::size_t>(result.clusters),
                        std::vector<long>(static_cast<std::size_t>(result.components), 0));
  result.unassigned_counts.assign(static_cast<std::size_t>(result.components), 0);
  std::vector<long> cluster_size(static_cast<std::size_t>(result.clusters), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnassigned) {
      ++result.unassigned_counts[static_cast<std::size_t>(truth[i])];
      ++result.unassigned_total;
      continue;
    }
    ++result.overlap[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(truth[i])];
    ++cluster_size[static_cast<std::size_t>(labels[i])];
  }

  std::vector<int> order(static_cast<std::size_t>(result.clusters));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const long sa = cluster_size[static_cast<std::size_t>(a)];
    const long sb = cluster_size[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });

  result.match.assign(static_cast<std::size_t>(result.clusters), -1);
  std::vector<bool> used(static_cast<std::size_t>(result.components), false);
  for (int k : order) {
    long best_overlap = 0;
    int best = -1;
    for (int c = 0; c < result.components; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      const long o = result.overlap[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
      if (o > best_overlap) {
        best_overlap = o;
        best = c;
      }
    }
    if (best >= 0) {
      result.match[static_cast<std::size_t>(k)] = best;
      used[static_cast<std::size_t>(best)] = true;
      result.matched_correct += best_overlap;
    }
  }
  return result;
}

}  // namespace

void MsConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("MsConfig: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("MsConfig: max_iter must be >= 1");
  if (!(merge_tol > 0.0)) throw std::invalid_argument("MsConfig: merge_tol must be > 0");
  if (threads < 1) throw std::invalid_argument("MsConfig: threads must be >= 1");
}

sphere::UnitVector ms_step(const kde::KdeModel& model, const sphere::UnitVector& y) {
  const Vector numerator = kde::shift_numerator(model, y);
  const double norm = numerator.norm();
  if (!(norm > 1e-300)) {
    throw DegenerateStep(
        "ms_step: weighted data sum cancelled to zero (antipodal-symmetric weights); the "
        "fixed-point update is undefined at this point");
  }
  return sphere::normalize(numerator);
}

ModePath ms_converge(const kde::KdeModel& model, const sphere::UnitVector& y0,
                     const MsConfig& config) {
  config.validate();
  ModePath path;
  path.points.push_back(y0);
  path.densities.push_back(kde::density(model, y0));
  sphere::UnitVector y = y0;
  for (int s = 1; s <= config.max_iter; ++s) {
    const sphere::UnitVector next = ms_step(model, y);
    const double gap = 1.0 - next.dot(y);
    path.points.push_back(next);
    path.densities.push_back(kde::density(model, next));
    path.iterations = s;
    y = next;
    if (gap <= config.tol) {
      path.converged = true;
      break;
    }
  }
  return path;
}

double adaptive_step_size(const kde::KdeModel& model, const sphere::UnitVector& y) {
  const Vector gradient = kde::total_gradient_hat(model, y);
  const double radial = y.coords().dot(gradient);
  const Vector tangent = gradient - radial * y.coords();
  const double tangent_norm = tangent.norm();
  if (!(gradient.norm() > 0.0) || !(tangent_norm > 1e-300)) {
    throw ZeroGradient("adaptive_step_size: gradient vanishes at this point");
  }
  // θ is the angle between y and the fixed-point update ∇f̂/‖∇f̂‖; then
  // η·‖tangent gradient‖ = θ reproduces that update through the exponential
  // map, and η = θ/(sin θ·‖∇f̂‖) because sin θ = ‖tangent‖/‖∇f̂‖.
  const double theta = std::atan2(tangent_norm, radial);
  return theta / tangent_norm;
}

ModePath gradient_ascent_fixed_step(const kde::KdeModel& model, const sphere::UnitVector& y0,
                                    double eta, const MsConfig& config) {
  config.validate();
  if (eta < 0.0) throw std::invalid_argument("gradient_ascent_fixed_step: eta must be >= 0");
  ModePath path;
  path.points.push_back(y0);
  path.densities.push_back(kde::density(model, y0));
  sphere::UnitVector y = y0;
  for (int s = 1; s <= config.max_iter; ++s) {
    const sphere::TangentVector step = kde::riemannian_gradient(model, y).scaled(eta);
    const sphere::UnitVector next = sphere::exp_map(y, step);
    const double gap = 1.0 - next.dot(y);
    path.points.push_back(next);
    path.densities.push_back(kde::density(model, next));
    path.iterations = s;
    y = next;
    if (gap <= config.tol) {
      path.converged = true;
      break;
    }
  }
  return path;
}

ModeClustering cluster(const kde::KdeModel& model, const Matrix& query_points,
                       const MsConfig& config) {
  config.validate();
  if (query_points.cols() != model.data().cols()) {
    throw std::invalid_argument("cluster: query dimension mismatch");
  }
  const int m = static_cast<int>(query_points.rows());

  ModeClustering result;
  result.config = config;
  result.iterations.assign(static_cast<std::size_t>(m), 0);
  result.converged.assign(static_cast<std::size_t>(m), 0);
  if (config.record_trace) result.paths.resize(static_cast<std::size_t>(m));

  std::vector<Vector> terminals(static_cast<std::size_t>(m));
  std::vector<double> terminal_density(static_cast<std::size_t>(m), 0.0);

  detail::parallel_for(static_cast<std::size_t>(m), config.threads, [&](std::size_t i) {
    sphere::UnitVector y(query_points.row(static_cast<Eigen::Index>(i)).transpose());
    ModePath trace;
    if (config.record_trace) {
      trace.points.push_back(y);
      trace.densities.push_back(kde::density(model, y));
    }
    bool converged = false;
    int steps_taken = 0;
    // The per-point loop mirrors ms_converge but records degenerate steps
    // as a non-converged terminal instead of aborting the batch.
    for (int s = 1; s <= config.max_iter; ++s) {
      sphere::UnitVector next = y;
      try {
        next = ms_step(model, y);
      } catch (const DegenerateStep&) {
        break;
      }
      const double gap = 1.0 - next.dot(y);
      y = next;
      steps_taken = s;
      if (config.record_trace) {
        trace.points.push_back(y);
        trace.densities.push_back(kde::density(model, y));
      }
      if (gap <= config.tol) {
        converged = true;
        break;
      }
    }
    terminals[i] = y.coords();
    terminal_density[i] = kde::density(model, y);
    result.iterations[i] = steps_taken;
    result.converged[i] = converged ? 1 : 0;
    if (config.record_trace) {
      trace.converged = converged;
      trace.iterations = steps_taken;
      result.paths[i] = std::move(trace);
    }
  });

  merge_and_label(terminals, terminal_density, result.converged, config.merge_tol, result.modes,
                  result.labels);
  result.steps =
      result.iterations.empty()
          ? 0
          : *std::max_element(result.iterations.begin(), result.iterations.end());
  return result;
}

ModeClustering blurring_dms(const Matrix& data, double h,
                            const kernels::DirectionalKernel& kernel, const MsConfig& config) {
  config.validate();
  const int m = static_cast<int>(data.rows());
  const int q = static_cast<int>(data.cols()) - 1;
  // c_{h,q}(L) depends only on h, q and the kernel, so one computation
  // serves every sweep even though the point cloud changes.
  const kernels::NormalizingConstant norm = kernels::normalizing_constant(kernel, h, q);

  Matrix points = data;
  std::vector<std::uint8_t> degenerate(static_cast<std::size_t>(m), 0);
  double previous_entropy = 0.0;
  bool have_previous_entropy = false;
  bool stopped = false;
  int sweeps = 0;

  for (int s = 1; s <= config.max_iter; ++s) {
    const kde::KdeModel model(points, h, kernel, norm);
    Matrix next(points.rows(), points.cols());
    Eigen::ArrayXd displacement(m);

    detail::parallel_for(static_cast<std::size_t>(m), config.threads, [&](std::size_t i) {
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      const sphere::UnitVector y(points.row(row).transpose());
      try {
        next.row(row) = ms_step(model, y).coords().transpose();
      } catch (const DegenerateStep&) {
        next.row(row) = points.row(row);  // freeze the point; flagged below
        degenerate[i] = 1;
      }
      displacement(row) = (next.row(row) - points.row(row)).norm();
    });

    points.swap(next);
    sweeps = s;

    const double mean_displacement = displacement.mean();
    const double entropy = displacement_entropy(displacement);
    if (mean_displacement <= config.tol) {
      stopped = true;
      break;
    }
    if (have_previous_entropy && std::abs(entropy - previous_entropy) <= 1e-8) {
      stopped = true;
      break;
    }
    previous_entropy = entropy;
    have_previous_entropy = true;
  }

  const kde::KdeModel final_model(points, h, kernel, norm);
  std::vector<Vector> terminals(static_cast<std::size_t>(m));
  std::vector<double> terminal_density(static_cast<std::size_t>(m), 0.0);
  ModeClustering result;
  result.config = config;
  result.iterations.assign(static_cast<std::size_t>(m), sweeps);
  result.converged.assign(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    const sphere::UnitVector y(points.row(i).transpose());
    terminals[static_cast<std::size_t>(i)] = y.coords();
    terminal_density[static_cast<std::size_t>(i)] = kde::density(final_model, y);
    result.converged[static_cast<std::size_t>(i)] =
        (stopped && !degenerate[static_cast<std::size_t>(i)]) ? 1 : 0;
  }

  merge_and_label(terminals, terminal_density, result.converged, config.merge_tol, result.modes,
                  result.labels);
  result.steps = sweeps;
  return result;
}

double misclassification_rate(const std::vector<int>& labels, const std::vector<int>& truth) {
  const GreedyMatch match = greedy_match(labels, truth);
  return 1.0 - static_cast<double>(match.matched_correct) / static_cast<double>(match.total);
}

Eigen::MatrixXi confusion_matrix(const std::vector<int>& labels, const std::vector<int>& truth) {
  const GreedyMatch match = greedy_match(labels, truth);

  std::vector<int> component_to_cluster(static_cast<std::size_t>(match.components), -1);
  std::vector<int> unmatched;
  for (int k = 0; k < match.clusters; ++k) {
    const int component = match.match[static_cast<std::size_t>(k)];
    if (component >= 0) {
      component_to_cluster[static_cast<std::size_t>(component)] = k;
    } else {
      unmatched.push_back(k);
    }
  }

  const int extra_unassigned = match.unassigned_total > 0 ? 1 : 0;
  const int rows = match.components + static_cast<int>(unmatched.size()) + extra_unassigned;
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(rows, match.components);

  for (int j = 0; j < match.components; ++j) {
    const int k = component_to_cluster[static_cast<std::size_t>(j)];
    if (k < 0) continue;
    for (int c = 0; c < match.components; ++c) {
      counts(j, c) =
          static_cast<int>(match.overlap[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
    }
  }
  for (std::size_t u = 0; u < unmatched.size(); ++u) {
    for (int c = 0; c < match.components; ++c) {
      counts(match.components + static_cast<int>(u), c) = static_cast<int>(
          match.overlap[static_cast<std::size_t>(unmatched[u])][static_cast<std::size_t>(c)]);
    }
  }
  if (extra_unassigned) {
    for (int c = 0; c < match.components; ++c) {
      counts(rows - 1, c) = static_cast<int>(match.unassigned_counts[static_cast<std::size_t>(c)]);
    }
  }
  return counts;
}

double hausdorff_distance(const std::vector<sphere::UnitVector>& a,
                          const std::vector<sphere::UnitVector>& b) {
  if (a.empty() || b.empty()) {
    throw EmptySet("hausdorff_distance: both sets must be nonempty");
  }
  auto directed = [](const std::vector<sphere::UnitVector>& from,
                     const std::vector<sphere::UnitVector>& to) {
    double worst = 0.0;
    for (const auto& x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : to) {
        best = std::min(best, (x.coords() - y.coords()).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace dirms::meanshift
