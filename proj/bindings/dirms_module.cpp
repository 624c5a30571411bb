#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dirms/bandwidth.hpp"
#include "dirms/errors.hpp"
#include "dirms/kde.hpp"
#include "dirms/kernels.hpp"
#include "dirms/meanshift.hpp"
#include "dirms/sampling.hpp"
#include "dirms/sphere.hpp"

namespace py = pybind11;

namespace {

using dirms::sphere::Matrix;
using dirms::sphere::UnitVector;
using dirms::sphere::Vector;

UnitVector as_unit(const Vector& v) { return UnitVector(v); }

//! Python-facing clustering result: modes as matrix rows plus flat
//! per-point vectors, the pieces a numpy caller actually wants.
struct ClusterResult {
  Matrix modes;
  std::vector<int> labels;
  std::vector<int> iterations;
  std::vector<bool> converged;
  int steps = 0;
};

ClusterResult pack(const dirms::meanshift::ModeClustering& run, Eigen::Index dim) {
  ClusterResult out;
  out.modes.resize(static_cast<Eigen::Index>(run.modes.size()), dim);
  for (std::size_t i = 0; i < run.modes.size(); ++i) {
    out.modes.row(static_cast<Eigen::Index>(i)) = run.modes[i].coords();
  }
  out.labels = run.labels;
  out.iterations = run.iterations;
  out.converged.assign(run.converged.begin(), run.converged.end());
  out.steps = run.steps;
  return out;
}

dirms::meanshift::MsConfig make_config(double tol, int max_iter, double merge_tol, int threads) {
  dirms::meanshift::MsConfig config;
  config.tol = tol;
  config.max_iter = max_iter;
  config.merge_tol = merge_tol;
  config.threads = threads;
  config.validate();
  return config;
}

double resolve_bandwidth(const Matrix& data, std::optional<double> h) {
  if (h.has_value()) return *h;
  const int q = static_cast<int>(data.cols()) - 1;
  return dirms::bandwidth::rot_bandwidth(data, q).h;
}

std::vector<UnitVector> rows_as_units(const Matrix& points) {
  std::vector<UnitVector> out;
  out.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) out.emplace_back(points.row(i).transpose());
  return out;
}

}  // namespace

PYBIND11_MODULE(_dirms, m) {
  m.doc() =
      "Kernel density estimation and mean-shift mode clustering for data on "
      "unit hyperspheres.";
  m.attr("__version__") = "0.1.0";
  m.attr("UNASSIGNED") = dirms::meanshift::kUnassigned;

  py::register_exception<dirms::Error>(m, "Error", PyExc_RuntimeError);

  py::class_<dirms::bandwidth::BandwidthSelection>(m, "BandwidthSelection",
                                                   "Automatic bandwidth pick with its inputs.")
      .def_readonly("h", &dirms::bandwidth::BandwidthSelection::h, "Selected bandwidth.")
      .def_readonly("nu_hat", &dirms::bandwidth::BandwidthSelection::nu_hat,
                    "Estimated concentration of the fitted reference density.")
      .def_readonly("r_bar", &dirms::bandwidth::BandwidthSelection::r_bar,
                    "Mean resultant length of the sample.")
      .def_readonly("n", &dirms::bandwidth::BandwidthSelection::n, "Sample size.")
      .def_readonly("q", &dirms::bandwidth::BandwidthSelection::q, "Sphere dimension.")
      .def("__repr__", [](const dirms::bandwidth::BandwidthSelection& s) {
        return "BandwidthSelection(h=" + std::to_string(s.h) +
               ", nu_hat=" + std::to_string(s.nu_hat) + ", n=" + std::to_string(s.n) + ")";
      });

  py::class_<ClusterResult>(m, "ClusterResult",
                            "Modes and per-point assignments from a mode-clustering run.")
      .def_readonly("modes", &ClusterResult::modes,
                    "One merged mode per row, in order of first appearance.")
      .def_readonly("labels", &ClusterResult::labels,
                    "Mode index per input point; UNASSIGNED for non-converged points.")
      .def_readonly("iterations", &ClusterResult::iterations, "Per-point step counts.")
      .def_readonly("converged", &ClusterResult::converged, "Per-point convergence flags.")
      .def_readonly("steps", &ClusterResult::steps,
                    "Largest per-point iteration count (sweep count for blurring).")
      .def("__repr__", [](const ClusterResult& r) {
        return "ClusterResult(modes=" + std::to_string(r.modes.rows()) +
               ", points=" + std::to_string(r.labels.size()) +
               ", steps=" + std::to_string(r.steps) + ")";
      });

  py::class_<dirms::kde::KdeModel>(m, "KdeModel",
                                   "Immutable kernel density estimate over unit-norm rows.")
      .def(py::init([](Matrix data, double h) {
             return dirms::kde::KdeModel(std::move(data), h,
                                         dirms::kernels::von_mises_kernel());
           }),
           py::arg("data"), py::arg("h"),
           "Build the estimator from an (n, q+1) array of unit rows and a "
           "bandwidth h > 0.")
      .def_property_readonly("h", &dirms::kde::KdeModel::h)
      .def_property_readonly("q", &dirms::kde::KdeModel::q)
      .def_property_readonly("n", &dirms::kde::KdeModel::n)
      .def(
          "density",
          [](const dirms::kde::KdeModel& model, const Vector& x) {
            return dirms::kde::density(model, as_unit(x));
          },
          py::arg("x"), "Density at one unit vector.")
      .def(
          "density_many",
          [](const dirms::kde::KdeModel& model, const Matrix& points) {
            Vector out(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
              out[i] = dirms::kde::density(model, as_unit(points.row(i).transpose()));
            }
            return out;
          },
          py::arg("points"), "Density at every row of an (m, q+1) array.")
      .def(
          "gradient",
          [](const dirms::kde::KdeModel& model, const Vector& x) {
            return dirms::kde::riemannian_gradient(model, as_unit(x)).vec();
          },
          py::arg("x"),
          "Tangent-space (sphere-intrinsic) density gradient at one unit vector.")
      .def(
          "total_gradient",
          [](const dirms::kde::KdeModel& model, const Vector& x) {
            return dirms::kde::total_gradient_hat(model, as_unit(x));
          },
          py::arg("x"), "Unprojected ambient density gradient at one unit vector.")
      .def(
          "hessian",
          [](const dirms::kde::KdeModel& model, const Vector& x) {
            return dirms::kde::riemannian_hessian(model, as_unit(x)).matrix;
          },
          py::arg("x"), "Sphere-intrinsic density Hessian as a (q+1, q+1) matrix.")
      .def(
          "hessian_eigenvalues",
          [](const dirms::kde::KdeModel& model, const Vector& x) {
            return dirms::kde::riemannian_hessian(model, as_unit(x)).tangent_eigenvalues;
          },
          py::arg("x"),
          "Eigenvalues of the tangent-space Hessian, sorted descending; all "
          "negative at a well-separated mode.")
      .def(
          "ascend",
          [](const dirms::kde::KdeModel& model, const Vector& start, double tol, int max_iter) {
            dirms::meanshift::MsConfig config;
            config.tol = tol;
            config.max_iter = max_iter;
            config.validate();
            const dirms::meanshift::ModePath path =
                dirms::meanshift::ms_converge(model, as_unit(start), config);
            Matrix points(static_cast<Eigen::Index>(path.points.size()), model.q() + 1);
            for (std::size_t i = 0; i < path.points.size(); ++i) {
              points.row(static_cast<Eigen::Index>(i)) = path.points[i].coords();
            }
            return py::make_tuple(points, path.densities, path.converged, path.iterations);
          },
          py::arg("start"), py::arg("tol") = 1e-7, py::arg("max_iter") = 1000,
          "Run the fixed-point ascent from one start; returns (visited points "
          "as rows, their densities, converged flag, iteration count).");

  m.def(
      "rot_bandwidth",
      [](const Matrix& data) {
        const int q = static_cast<int>(data.cols()) - 1;
        return dirms::bandwidth::rot_bandwidth(data, q);
      },
      py::arg("data"),
      "Automatic plug-in bandwidth from the sample's mean resultant length.");

  m.def(
      "cluster",
      [](const Matrix& data, std::optional<double> h, std::optional<Matrix> query, double tol,
         int max_iter, double merge_tol, int threads) {
        const double bandwidth = resolve_bandwidth(data, h);
        const dirms::meanshift::MsConfig config = make_config(tol, max_iter, merge_tol, threads);
        const dirms::kde::KdeModel model(data, bandwidth, dirms::kernels::von_mises_kernel());
        const Matrix& starts = query.has_value() ? *query : data;
        return pack(dirms::meanshift::cluster(model, starts, config), data.cols());
      },
      py::arg("data"), py::arg("h") = py::none(), py::arg("query") = py::none(),
      py::arg("tol") = 1e-7, py::arg("max_iter") = 1000, py::arg("merge_tol") = 1e-2,
      py::arg("threads") = 1,
      "Cluster points by the density mode their ascent path reaches. h=None "
      "selects the automatic bandwidth; query defaults to the data itself.");

  m.def(
      "blurring",
      [](const Matrix& data, std::optional<double> h, double tol, int max_iter, double merge_tol,
         int threads) {
        const double bandwidth = resolve_bandwidth(data, h);
        const dirms::meanshift::MsConfig config = make_config(tol, max_iter, merge_tol, threads);
        return pack(dirms::meanshift::blurring_dms(data, bandwidth,
                                                   dirms::kernels::von_mises_kernel(), config),
                    data.cols());
      },
      py::arg("data"), py::arg("h") = py::none(), py::arg("tol") = 1e-7,
      py::arg("max_iter") = 1000, py::arg("merge_tol") = 1e-2, py::arg("threads") = 1,
      "Blurring variant: every sweep moves the whole point cloud at once; "
      "usually needs far fewer sweeps than per-point ascent needs iterations.");

  m.def(
      "sample_uniform",
      [](int q, Eigen::Index n, std::uint64_t seed) {
        dirms::sampling::SeededRng rng(seed);
        return dirms::sampling::sample_uniform_sphere(q, n, rng);
      },
      py::arg("q"), py::arg("n"), py::arg("seed"),
      "n points drawn uniformly on the q-sphere, one per row; deterministic "
      "in the seed.");

  m.def(
      "sample_vmf",
      [](const Vector& mu, double nu, Eigen::Index n, std::uint64_t seed) {
        dirms::sampling::SeededRng rng(seed);
        return dirms::sampling::sample_vmf(as_unit(mu), nu, n, rng);
      },
      py::arg("mu"), py::arg("nu"), py::arg("n"), py::arg("seed"),
      "n von Mises-Fisher draws around the unit vector mu with concentration "
      "nu; deterministic in the seed.");

  m.def(
      "sample_mixture",
      [](const Matrix& means, const std::vector<double>& concentrations,
         const std::vector<double>& weights, Eigen::Index n, std::uint64_t seed) {
        if (static_cast<std::size_t>(means.rows()) != concentrations.size() ||
            concentrations.size() != weights.size()) {
          throw std::invalid_argument(
              "sample_mixture: means rows, concentrations and weights must "
              "have equal length");
        }
        dirms::sampling::MixtureSpec spec;
        spec.q = static_cast<int>(means.cols()) - 1;
        for (Eigen::Index i = 0; i < means.rows(); ++i) {
          spec.components.push_back({as_unit(means.row(i).transpose()),
                                     concentrations[static_cast<std::size_t>(i)],
                                     weights[static_cast<std::size_t>(i)]});
        }
        spec.validate();
        dirms::sampling::SeededRng rng(seed);
        dirms::sampling::LabeledSample sample = dirms::sampling::sample_mixture(spec, n, rng);
        return py::make_tuple(sample.points, sample.labels);
      },
      py::arg("means"), py::arg("concentrations"), py::arg("weights"), py::arg("n"),
      py::arg("seed"),
      "n labeled draws from a von Mises-Fisher mixture; returns (points, "
      "component labels).");

  m.def(
      "sample_circular",
      [](Eigen::Index n, std::uint64_t seed) {
        dirms::sampling::SeededRng rng(seed);
        dirms::sampling::LabeledAngles draw = dirms::sampling::sample_circular_f1_labeled(n, rng);
        return py::make_tuple(draw.angles, draw.labels);
      },
      py::arg("n"), py::arg("seed"),
      "n labeled angles from the bimodal circular test mixture (half a "
      "truncated Laplace at 0, half a von Mises at pi/2).");

  m.def("circular_density", &dirms::sampling::circular_f1_density, py::arg("theta"),
        "Density of the circular test mixture at an angle in [-pi, pi].");

  m.def("embed_angles", &dirms::sampling::embed_angles, py::arg("angles"),
        "Angles to rows (cos t, sin t) on the unit circle.");

  m.def("misclassification_rate", &dirms::meanshift::misclassification_rate, py::arg("labels"),
        py::arg("truth"),
        "Error fraction after greedily matching clusters to truth components "
        "by overlap; unassigned points always count as errors.");

  m.def("confusion_matrix", &dirms::meanshift::confusion_matrix, py::arg("labels"),
        py::arg("truth"),
        "Contingency counts under the same greedy matching, one row per truth "
        "component (plus rows for unmatched clusters and unassigned points).");

  m.def(
      "hausdorff_distance",
      [](const Matrix& a, const Matrix& b) {
        return dirms::meanshift::hausdorff_distance(rows_as_units(a), rows_as_units(b));
      },
      py::arg("a"), py::arg("b"),
      "Hausdorff distance between two point sets (rows), in the ambient "
      "chord metric.");

  m.def(
      "geodesic_distance",
      [](const Vector& x, const Vector& y) {
        return dirms::sphere::geodesic_distance(as_unit(x), as_unit(y));
      },
      py::arg("x"), py::arg("y"), "Great-circle distance between two unit vectors, in radians.");

  m.def("lonlat_to_unit",
        [](double lon, double lat) { return dirms::sphere::lonlat_to_unit(lon, lat).coords(); },
        py::arg("lon"), py::arg("lat"),
        "Longitude/latitude in degrees to a unit vector in R^3.");

  m.def(
      "unit_to_lonlat",
      [](const Vector& x) { return dirms::sphere::unit_to_lonlat(as_unit(x)); },
      py::arg("x"), "Unit vector in R^3 to (longitude, latitude) in degrees.");
}
