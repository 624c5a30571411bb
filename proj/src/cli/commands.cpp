#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dirms/bandwidth.hpp"
#include "dirms/cli.hpp"
#include "dirms/kde.hpp"
#include "dirms/meanshift.hpp"
#include "dirms/oracles.hpp"
#include "dirms/sampling.hpp"
#include "json.hpp"

namespace dirms::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = 3.141592653589793238462643383279502884;

//! Fixed-width reproducible number formatting for CSV output.
std::string fmt17(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write output file: " + path.string());
  file << content;
  if (!file) throw Error("failed while writing output file: " + path.string());
}

std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::filesystem::path path(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return path;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

json input_json(const InputDataset& dataset) {
  return json{{"path", dataset.path},
              {"format", to_string(dataset.source_format)},
              {"rows_kept", dataset.rows_kept},
              {"rows_dropped", dataset.rows_dropped},
              {"rows_filtered", dataset.rows_filtered},
              {"issues", dataset.issues}};
}

//! Modes as lon/lat for S², Cartesian coordinates otherwise.
json mode_json(const sphere::UnitVector& mode) {
  if (mode.dim() == 3) {
    const auto [lon, lat] = sphere::unit_to_lonlat(mode);
    return json{{"lon", lon}, {"lat", lat}};
  }
  json coords = json::array();
  for (Eigen::Index i = 0; i < mode.dim(); ++i) coords.push_back(mode.coords()(i));
  return json{{"coords", coords}};
}

json clustering_json(const meanshift::ModeClustering& result) {
  json modes = json::array();
  for (const auto& mode : result.modes) modes.push_back(mode_json(mode));
  std::size_t unassigned = 0;
  for (int label : result.labels) {
    if (label == meanshift::kUnassigned) ++unassigned;
  }
  return json{{"n_modes", result.modes.size()},
              {"modes", modes},
              {"labels", result.labels},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"steps", result.steps},
              {"unassigned", unassigned}};
}

meanshift::MsConfig make_config(double tol, int max_iter, double merge_tol, int threads) {
  meanshift::MsConfig config;
  config.tol = tol;
  config.max_iter = max_iter;
  config.merge_tol = merge_tol;
  config.threads = threads;
  config.record_trace = false;
  config.validate();
  return config;
}

json bandwidth_json(const BandwidthSpec& spec, double resolved) {
  return json{{"mode", spec.automatic ? "auto" : "explicit"},
              {"scale", spec.scale},
              {"h", resolved}};
}

std::string labels_csv(const std::vector<int>& labels) {
  std::string out = "row,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  }
  return out;
}

//! One clustering pass shared by cluster and simulate.
meanshift::ModeClustering run_clustering(const Matrix& points, double h,
                                         const kernels::DirectionalKernel& kernel,
                                         const meanshift::MsConfig& config, bool blurring) {
  if (blurring) return meanshift::blurring_dms(points, h, kernel, config);
  const kde::KdeModel model(points, h, kernel);
  return meanshift::cluster(model, points, config);
}

// ---------------------------------------------------------------- simulate

struct ScenarioDraw {
  Matrix points;
  std::vector<int> truth;
  std::vector<double> angles;  // circular only, for the dataset CSV
  int components = 1;
};

sphere::UnitVector basis_vector(int dim, int index) {
  Vector e = Vector::Zero(dim);
  e(index) = 1.0;
  return sphere::UnitVector(e);
}

ScenarioDraw draw_scenario(const std::string& scenario, Eigen::Index n, int q,
                           sampling::SeededRng& rng) {
  ScenarioDraw draw;
  if (scenario == "circular") {
    auto labeled = sampling::sample_circular_f1_labeled(n, rng);
    draw.points = sampling::embed_angles(labeled.angles);
    draw.truth = std::move(labeled.labels);
    draw.angles = std::move(labeled.angles);
    draw.components = 2;
    return draw;
  }
  if (scenario == "sphere1") {
    const sphere::UnitVector mu = basis_vector(3, 0);
    draw.points = sampling::sample_vmf(mu, 5.0, n, rng);
    draw.truth.assign(static_cast<std::size_t>(n), 0);
    draw.components = 1;
    return draw;
  }
  if (scenario == "sphere3") {
    sampling::MixtureSpec spec;
    spec.q = 2;
    spec.components = {{sphere::lonlat_to_unit(-120.0, -45.0), 8.0, 0.3},
                       {sphere::lonlat_to_unit(0.0, 60.0), 8.0, 0.3},
                       {sphere::lonlat_to_unit(150.0, 0.0), 5.0, 0.4}};
    auto sample = sampling::sample_mixture(spec, n, rng);
    draw.points = std::move(sample.points);
    draw.truth = std::move(sample.labels);
    draw.components = 3;
    return draw;
  }
  if (scenario == "hyperq") {
    if (q < 3 || q > 12) {
      throw std::invalid_argument("hyperq scenario expects --q in [3, 12]");
    }
    sampling::MixtureSpec spec;
    spec.q = q;
    for (int i = 0; i < 4; ++i) {
      spec.components.push_back({basis_vector(q + 1, i), 10.0, 0.25});
    }
    auto sample = sampling::sample_mixture(spec, n, rng);
    draw.points = std::move(sample.points);
    draw.truth = std::move(sample.labels);
    draw.components = 4;
    return draw;
  }
  throw UnknownScenario("unknown scenario '" + scenario +
                        "' (expected circular, sphere1, sphere3, or hyperq)");
}

std::string dataset_csv(const ScenarioDraw& draw) {
  std::string out;
  const Eigen::Index n = draw.points.rows();
  if (!draw.angles.empty()) {
    out = "theta,label\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      out += fmt17(draw.angles[static_cast<std::size_t>(i)]) + "," +
             std::to_string(draw.truth[static_cast<std::size_t>(i)]) + "\n";
    }
    return out;
  }
  if (draw.points.cols() == 3) {
    out = "lon,lat,label\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [lon, lat] = sphere::unit_to_lonlat(sphere::UnitVector(draw.points.row(i).transpose()));
      out += fmt17(lon) + "," + fmt17(lat) + "," +
             std::to_string(draw.truth[static_cast<std::size_t>(i)]) + "\n";
    }
    return out;
  }
  for (Eigen::Index j = 0; j < draw.points.cols(); ++j) {
    out += "x" + std::to_string(j) + ",";
  }
  out += "label\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < draw.points.cols(); ++j) {
      out += fmt17(draw.points(i, j)) + ",";
    }
    out += std::to_string(draw.truth[static_cast<std::size_t>(i)]) + "\n";
  }
  return out;
}

// ------------------------------------------------------------------ verify

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string rel_detail(double margin, double tol) {
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "margin %.3g vs tol %.3g", margin, tol);
  return buffer;
}

//! Independent ambient-route Riemannian Hessian
//! P [∇∇f̃ − (xᵀ∇f̃)·I] P assembled from raw kernel hooks; the production
//! path builds the same matrix from the data-outer-product form instead.
Matrix ambient_route_hessian(const kde::KdeModel& model, const sphere::UnitVector& x) {
  const Matrix& data = model.data();
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  const double h2 = model.h() * model.h();
  const Vector& xv = x.coords();

  Matrix second = Matrix::Zero(d, d);
  double deriv_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector diff = xv - data.row(i).transpose();
    const double s = 0.5 * diff.squaredNorm() / h2;
    deriv_sum += model.kernel().deriv(s);
    second += model.kernel().deriv2(s) * (diff * diff.transpose()) / (h2 * h2);
  }
  const double scale = model.norm_const().value / static_cast<double>(n);
  const Matrix grad2 = scale * (second + (deriv_sum / h2) * Matrix::Identity(d, d));
  const double radial = xv.dot(kde::total_gradient_alt(model, xv));
  const Matrix projector = Matrix::Identity(d, d) - xv * xv.transpose();
  return projector * grad2 * projector - radial * projector;
}

}  // namespace

// ------------------------------------------------------------------ cluster

int cmd_cluster(const ClusterOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const InputDataset dataset = ingest(options.data.input, options.data.format,
                                      options.data.min_filter);
  const double h = options.bandwidth.resolve(dataset.points);
  const kernels::DirectionalKernel kernel = kernel_by_name(options.kernel);
  const meanshift::MsConfig config =
      make_config(options.tol, options.max_iter, options.merge_tol, options.threads);
  const std::uint64_t seed = resolve_seed(options.seed);

  const meanshift::ModeClustering result =
      run_clustering(dataset.points, h, kernel, config, options.blurring);
  const bool all_converged =
      std::all_of(result.converged.begin(), result.converged.end(),
                  [](std::uint8_t flag) { return flag != 0; });

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json report{{"command", "cluster"},
              {"input", input_json(dataset)},
              {"config",
               {{"bandwidth", bandwidth_json(options.bandwidth, h)},
                {"kernel", options.kernel},
                {"tol", options.tol},
                {"max_iter", options.max_iter},
                {"merge_tol", options.merge_tol},
                {"blurring", options.blurring},
                {"threads", options.threads},
                {"seed", seed}}},
              {"results", clustering_json(result)},
              {"all_converged", all_converged},
              {"timing", {{"seconds", seconds}}}};

  const auto out_dir = prepare_output_dir(options.output_dir);
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  write_text(out_dir / "labels.csv", labels_csv(result.labels));
  return all_converged ? 0 : 2;
}

// ------------------------------------------------------------------ density

int cmd_density(const DensityOptions& options) {
  const InputDataset dataset = ingest(options.data.input, options.data.format,
                                      options.data.min_filter);
  const int q = dataset.q();
  if (q != 1 && q != 2) {
    throw std::invalid_argument("density grids are exported for circles and spheres only");
  }
  const double h = options.bandwidth.resolve(dataset.points);
  const kde::KdeModel model(dataset.points, h, kernel_by_name(options.kernel));

  int lon_res = 181;
  int lat_res = 91;
  int circle_res = 512;
  if (options.grid_res != "auto") {
    const auto cross = options.grid_res.find('x');
    try {
      if (q == 2) {
        if (cross == std::string::npos) throw std::invalid_argument("");
        lon_res = std::stoi(options.grid_res.substr(0, cross));
        lat_res = std::stoi(options.grid_res.substr(cross + 1));
      } else {
        if (cross != std::string::npos) throw std::invalid_argument("");
        circle_res = std::stoi(options.grid_res);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("--grid-res expects '<lon>x<lat>' for spheres or a single "
                                  "count for circles, got '" + options.grid_res + "'");
    }
    if ((q == 2 && (lon_res < 16 || lat_res < 16)) || (q == 1 && circle_res < 16)) {
      throw std::invalid_argument("--grid-res values must be >= 16");
    }
  }

  std::string csv;
  double mass = 0.0;
  if (q == 2) {
    csv = "lon,lat,density\n";
    const double d_lon = 2.0 * kPi / (lon_res - 1);
    const double d_lat = kPi / (lat_res - 1);
    for (int j = 0; j < lat_res; ++j) {
      const double lat = -90.0 + 180.0 * j / (lat_res - 1);
      const double w_lat = (j == 0 || j == lat_res - 1) ? 0.5 : 1.0;
      for (int i = 0; i < lon_res; ++i) {
        const double lon = -180.0 + 360.0 * i / (lon_res - 1);
        const double w_lon = (i == 0 || i == lon_res - 1) ? 0.5 : 1.0;
        const double value = kde::density(model, sphere::lonlat_to_unit(lon, lat));
        csv += fmt17(lon) + "," + fmt17(lat) + "," + fmt17(value) + "\n";
        mass += value * std::cos(lat * kPi / 180.0) * w_lat * w_lon * d_lon * d_lat;
      }
    }
  } else {
    csv = "theta,density\n";
    Vector x(2);
    for (int k = 0; k < circle_res; ++k) {
      const double theta = -kPi + 2.0 * kPi * k / circle_res;
      x << std::cos(theta), std::sin(theta);
      const double value = kde::density(model, sphere::UnitVector(x));
      csv += fmt17(theta) + "," + fmt17(value) + "\n";
      mass += value * 2.0 * kPi / circle_res;
    }
  }

  json grid = (q == 2) ? json{{"lon_res", lon_res}, {"lat_res", lat_res}}
                       : json{{"res", circle_res}};
  json report{{"command", "density"},
              {"input", input_json(dataset)},
              {"config",
               {{"bandwidth", bandwidth_json(options.bandwidth, h)},
                {"kernel", options.kernel},
                {"grid", grid}}},
              {"mass", mass},
              {"mass_abs_error", std::abs(mass - 1.0)}};

  const auto out_dir = prepare_output_dir(options.output_dir);
  write_text(out_dir / "grid.csv", csv);
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  return 0;
}

// ----------------------------------------------------------------- simulate

int cmd_simulate(const SimulateOptions& options) {
  if (options.repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
  const Eigen::Index n =
      options.n > 0 ? options.n : (options.scenario == "circular" ? 60 : 1000);
  const std::uint64_t seed = resolve_seed(options.seed);
  const kernels::DirectionalKernel kernel = kernel_by_name(options.kernel);
  const meanshift::MsConfig config =
      make_config(options.tol, options.max_iter, options.merge_tol, options.threads);

  sampling::SeededRng rng(seed);
  std::string first_dataset_csv;
  std::vector<double> rates;
  std::vector<int> cluster_counts;
  json repeats_detail = json::array();

  for (int repeat = 0; repeat < options.repeats; ++repeat) {
    const ScenarioDraw draw = draw_scenario(options.scenario, n, options.q, rng);
    if (repeat == 0) first_dataset_csv = dataset_csv(draw);
    const double h = options.bandwidth.resolve(draw.points);
    const meanshift::ModeClustering result =
        run_clustering(draw.points, h, kernel, config, options.blurring);
    const double rate = meanshift::misclassification_rate(result.labels, draw.truth);
    rates.push_back(rate);
    cluster_counts.push_back(static_cast<int>(result.modes.size()));
    std::size_t unassigned = 0;
    for (int label : result.labels) {
      if (label == meanshift::kUnassigned) ++unassigned;
    }
    repeats_detail.push_back(json{{"repeat", repeat + 1},
                                  {"h", h},
                                  {"clusters", result.modes.size()},
                                  {"misclassification", rate},
                                  {"steps", result.steps},
                                  {"unassigned", unassigned}});
  }

  const double count = static_cast<double>(rates.size());
  const double mean_rate =
      std::accumulate(rates.begin(), rates.end(), 0.0) / count;
  double sd_rate = 0.0;
  if (rates.size() > 1) {
    double ss = 0.0;
    for (double r : rates) ss += (r - mean_rate) * (r - mean_rate);
    sd_rate = std::sqrt(ss / (count - 1.0));
  }
  const double mean_clusters =
      std::accumulate(cluster_counts.begin(), cluster_counts.end(), 0.0) / count;

  std::string rates_csv = "repeat,clusters,misclassification\n";
  for (std::size_t i = 0; i < rates.size(); ++i) {
    rates_csv += std::to_string(i + 1) + "," + std::to_string(cluster_counts[i]) + "," +
                 fmt17(rates[i]) + "\n";
  }
  rates_csv += "mean," + fmt17(mean_clusters) + "," + fmt17(mean_rate) + "\n";
  rates_csv += "sd,," + fmt17(sd_rate) + "\n";

  // No timing block here on purpose: simulate outputs are byte-identical
  // across runs for a fixed seed.
  json report{{"command", "simulate"},
              {"scenario", options.scenario},
              {"n", n},
              {"q", options.scenario == "hyperq" ? options.q
                                                 : (options.scenario == "circular" ? 1 : 2)},
              {"repeats", options.repeats},
              {"seed", seed},
              {"rng", sampling::SeededRng::algorithm()},
              {"config",
               {{"bandwidth_mode", options.bandwidth.automatic ? "auto" : "explicit"},
                {"bandwidth_scale", options.bandwidth.scale},
                {"kernel", options.kernel},
                {"tol", options.tol},
                {"max_iter", options.max_iter},
                {"merge_tol", options.merge_tol},
                {"blurring", options.blurring},
                {"threads", options.threads}}},
              {"repeats_detail", repeats_detail},
              {"summary",
               {{"mean_misclassification", mean_rate},
                {"sd_misclassification", sd_rate},
                {"mean_clusters", mean_clusters}}}};

  const auto out_dir = prepare_output_dir(options.output_dir);
  write_text(out_dir / "dataset.csv", first_dataset_csv);
  write_text(out_dir / "rates.csv", rates_csv);
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  const InputDataset dataset = ingest(options.data.input, options.data.format,
                                      options.data.min_filter);
  const double h = options.bandwidth.resolve(dataset.points);
  const kernels::DirectionalKernel kernel = kernel_by_name(options.kernel);
  const int q = dataset.q();

  std::vector<CheckResult> results;
  bool kernel_ok = true;
  {
    CheckResult check{"kernel-validity", true, "bounded, nonnegative, non-increasing profile"};
    try {
      kernels::validate_kernel(kernel);
    } catch (const std::exception& e) {
      check.pass = false;
      check.detail = e.what();
      kernel_ok = false;
    }
    results.push_back(std::move(check));
  }

  if (!kernel_ok) {
    for (const char* name : {"normalizing-constant", "density-mass", "fd-gradient",
                             "fd-hessian", "hessian-two-route", "ascent-monotonicity"}) {
      results.push_back({name, false, "skipped: kernel failed the validity check"});
    }
  } else {
    const kde::KdeModel model(dataset.points, h, kernel);
    sampling::SeededRng rng(options.seed);

    // Jittered copies of data rows: probe points where the density is not
    // vanishingly small, spread over the whole dataset.
    const Eigen::Index n = dataset.points.rows();
    auto probe = [&](Eigen::Index i) {
      Vector x = dataset.points.row(i % n).transpose();
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += 0.05 * rng.normal();
      return sphere::normalize(x);
    };

    {
      CheckResult check{"normalizing-constant", false, ""};
      try {
        if (kernel.name == "von_mises") {
          const double closed = kernels::normalizing_constant(kernel, h, q).value;
          const double lambda = kernels::lambda_hq(kernel, h, q);
          const double quad = std::exp(-q * std::log(h) - std::log(lambda));
          const double rel = std::abs(quad - closed) / closed;
          check.pass = rel <= 1e-8;
          check.detail = rel_detail(rel, 1e-8);
        } else {
          check.pass = true;
          check.detail = "quadrature-only kernel, no closed form to cross-check";
        }
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    {
      CheckResult check{"density-mass", false, ""};
      try {
        double mass = 0.0;
        double tol = 1e-6;
        if (q <= 3) {
          const int nodes = (q == 1) ? 512 : (q == 2 ? 64 : 32);
          mass = oracles::sphere_integral(
              [&](const Vector& x) { return kde::density_alt(model, x); }, q, nodes);
        } else {
          const int draws = 20000;
          tol = 0.02;
          sampling::SeededRng mc_rng(options.seed + 1);
          const Matrix uniform = sampling::sample_uniform_sphere(q, draws, mc_rng);
          double total = 0.0;
          for (Eigen::Index i = 0; i < uniform.rows(); ++i) {
            total += kde::density(model, sphere::UnitVector(uniform.row(i).transpose()));
          }
          mass = kernels::surface_area(q) * total / draws;
        }
        const double err = std::abs(mass - 1.0);
        check.pass = err <= tol;
        check.detail = rel_detail(err, tol);
        if (!check.pass && mass < 0.5) {
          check.detail += "; estimated mass " + fmt17(mass) +
                          " — the grid misses the kernel spikes (bandwidth too small for "
                          "quadrature, likely underflow-scale)";
        }
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    {
      CheckResult check{"fd-gradient", false, ""};
      try {
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
          const sphere::UnitVector y = probe(k * std::max<Eigen::Index>(1, n / 10));
          const Vector fd = oracles::fd_gradient(model, y.coords(), 1e-5);
          const Vector projected = sphere::tangent_project(y, fd).vec();
          const Vector exact = kde::riemannian_gradient(model, y).vec();
          const double scale = std::max(exact.norm(), 1e-12);
          worst = std::max(worst, (projected - exact).norm() / scale);
        }
        check.pass = worst <= 1e-5;
        check.detail = rel_detail(worst, 1e-5);
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    {
      CheckResult check{"fd-hessian", false, ""};
      try {
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
          const sphere::UnitVector y = probe(k * std::max<Eigen::Index>(1, n / 5));
          const Vector& xv = y.coords();
          const Matrix fd = oracles::fd_hessian(model, xv, 1e-4);
          const Vector fd_grad = oracles::fd_gradient(model, xv, 1e-5);
          const Matrix projector =
              Matrix::Identity(xv.size(), xv.size()) - xv * xv.transpose();
          const Matrix sandwich =
              projector * (fd - xv.dot(fd_grad) * Matrix::Identity(xv.size(), xv.size())) *
              projector;
          const Matrix exact = kde::riemannian_hessian(model, y).matrix;
          const double scale = std::max(exact.norm(), 1e-12);
          worst = std::max(worst, (sandwich - exact).norm() / scale);
        }
        check.pass = worst <= 1e-3;
        check.detail = rel_detail(worst, 1e-3);
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    {
      CheckResult check{"hessian-two-route", false, ""};
      try {
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
          const sphere::UnitVector y = probe(k * std::max<Eigen::Index>(1, n / 5));
          const Matrix route_a = kde::riemannian_hessian(model, y).matrix;
          const Matrix route_b = ambient_route_hessian(model, y);
          const double scale = std::max(1.0, route_a.cwiseAbs().maxCoeff());
          worst = std::max(worst, (route_a - route_b).cwiseAbs().maxCoeff() / scale);
        }
        check.pass = worst <= 1e-10;
        check.detail = rel_detail(worst, 1e-10);
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    {
      CheckResult check{"ascent-monotonicity", false, ""};
      try {
        const meanshift::MsConfig config =
            make_config(options.tol, options.max_iter, options.merge_tol, options.threads);
        const Eigen::Index starts = std::min<Eigen::Index>(n, 50);
        const Eigen::Index stride = std::max<Eigen::Index>(1, n / starts);
        int violations = 0;
        int unconverged = 0;
        int degenerate = 0;
        for (Eigen::Index i = 0; i < n; i += stride) {
          try {
            const meanshift::ModePath path = meanshift::ms_converge(
                model, sphere::UnitVector(dataset.points.row(i).transpose()), config);
            if (!path.converged) ++unconverged;
            for (std::size_t s = 1; s < path.densities.size(); ++s) {
              const double slack = 1e-12 * std::max(1.0, std::abs(path.densities[s - 1]));
              if (path.densities[s] < path.densities[s - 1] - slack) ++violations;
            }
          } catch (const meanshift::DegenerateStep&) {
            ++degenerate;
          }
        }
        check.pass = violations == 0 && degenerate == 0;
        check.detail = std::to_string(violations) + " density decreases, " +
                       std::to_string(degenerate) + " degenerate paths, " +
                       std::to_string(unconverged) + " hit the iteration cap";
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }

    if (q <= 2) {
      CheckResult check{"grid-mode-agreement", false, ""};
      try {
        const meanshift::MsConfig config =
            make_config(options.tol, options.max_iter, options.merge_tol, options.threads);
        const Eigen::Index cap = std::min<Eigen::Index>(n, 300);
        const Eigen::Index stride = std::max<Eigen::Index>(1, n / cap);
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < n; i += stride) rows.push_back(i);
        Matrix queries(static_cast<Eigen::Index>(rows.size()), dataset.points.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          queries.row(static_cast<Eigen::Index>(i)) = dataset.points.row(rows[i]);
        }
        const auto clustering = meanshift::cluster(model, queries, config);
        const auto grid = oracles::grid_modes(model, oracles::GridSpec{q, 64});
        if (clustering.modes.empty() || grid.empty()) {
          check.detail = "found " + std::to_string(clustering.modes.size()) +
                         " cluster modes vs " + std::to_string(grid.size()) + " grid modes";
        } else {
          double worst = 0.0;
          for (const auto& mode : clustering.modes) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& g : grid) best = std::min(best, sphere::geodesic_distance(mode, g));
            worst = std::max(worst, best);
          }
          for (const auto& g : grid) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& mode : clustering.modes) {
              best = std::min(best, sphere::geodesic_distance(mode, g));
            }
            worst = std::max(worst, best);
          }
          check.pass = worst <= options.merge_tol;
          check.detail = rel_detail(worst, options.merge_tol) + "; " +
                         std::to_string(clustering.modes.size()) + " cluster modes vs " +
                         std::to_string(grid.size()) + " grid modes";
        }
      } catch (const std::exception& e) {
        check.detail = e.what();
      }
      results.push_back(std::move(check));
    }
  }

  bool all_pass = true;
  for (const auto& check : results) {
    all_pass = all_pass && check.pass;
    out << (check.pass ? "PASS " : "FAIL ") << check.name << " (" << check.detail << ")\n";
  }
  out << (all_pass ? "verify: all checks passed\n" : "verify: at least one check failed\n");
  return all_pass ? 0 : 1;
}

}  // namespace dirms::cli
