#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dirms/cli.hpp"
#include "dirms/errors.hpp"

namespace {

//! Parallelism: --threads 0 means "auto" (hardware concurrency); the
//! DIRMS_THREADS environment variable caps whatever was requested.
int resolve_threads(int requested) {
  int threads = requested > 0 ? requested
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap_text = std::getenv("DIRMS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(cap_text, &end, 10);
    if (end != cap_text && *end == '\0' && cap >= 1) {
      threads = std::min<long>(threads, cap);
    }
  }
  return std::max(1, threads);
}

struct CommonFlags {
  std::string input;
  std::string format = "lonlat_deg";
  std::vector<std::string> min_filter;
  std::string bandwidth = "auto";
  double bandwidth_scale = 1.0;
  std::string kernel = "vonmises";
  double tol = 1e-7;
  int max_iter = 1000;
  double merge_tol = 1e-2;
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  int threads = 0;
};

void add_data_flags(CLI::App* cmd, CommonFlags& flags, bool required_input) {
  auto* input = cmd->add_option("--input", flags.input, "input CSV file (header row required)");
  if (required_input) input->required();
  cmd->add_option("--format", flags.format,
                  "input format: lonlat_deg, cartesian, or angles_rad")
      ->capture_default_str();
  cmd->add_option("--min-filter", flags.min_filter,
                  "keep rows whose COLUMN value is >= THRESHOLD")
      ->expected(2)
      ->type_name("COLUMN THRESHOLD");
}

void add_bandwidth_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--bandwidth", flags.bandwidth, "'auto' (rule of thumb) or a positive value")
      ->capture_default_str();
  cmd->add_option("--bandwidth-scale", flags.bandwidth_scale,
                  "multiplier applied to the automatic bandwidth")
      ->capture_default_str();
  cmd->add_option("--kernel", flags.kernel, "kernel profile name")->capture_default_str();
}

void add_iteration_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--tol", flags.tol, "stop when 1 - dot(successive iterates) <= tol")
      ->capture_default_str();
  cmd->add_option("--max-iter", flags.max_iter, "per-point iteration cap")->capture_default_str();
  cmd->add_option("--merge-tol", flags.merge_tol, "mode merging radius, radians")
      ->capture_default_str();
}

dirms::cli::DataOptions make_data_options(const CommonFlags& flags) {
  dirms::cli::DataOptions data;
  data.input = flags.input;
  data.format = dirms::cli::parse_source_format(flags.format);
  if (!flags.min_filter.empty()) {
    dirms::cli::MinFilter filter;
    filter.column = flags.min_filter[0];
    char* end = nullptr;
    filter.threshold = std::strtod(flags.min_filter[1].c_str(), &end);
    if (end != flags.min_filter[1].c_str() + flags.min_filter[1].size()) {
      throw std::invalid_argument("--min-filter threshold must be a number, got '" +
                                  flags.min_filter[1] + "'");
    }
    data.min_filter = filter;
  }
  return data;
}

std::optional<std::uint64_t> make_seed(const CommonFlags& flags) {
  if (flags.seed_option != nullptr && flags.seed_option->count() > 0) return flags.seed;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mode clustering for directional data: kernel density estimation, "
               "mean-shift mode seeking, and verification tools for spheres"};
  app.require_subcommand(1);

  CommonFlags cluster_flags;
  bool cluster_blurring = false;
  std::string cluster_output = ".";
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster an input dataset by density modes");
  add_data_flags(cluster_cmd, cluster_flags, true);
  add_bandwidth_flags(cluster_cmd, cluster_flags);
  add_iteration_flags(cluster_cmd, cluster_flags);
  cluster_cmd->add_flag("--blurring", cluster_blurring,
                        "move the whole dataset each sweep instead of one path per point");
  cluster_flags.seed_option =
      cluster_cmd->add_option("--seed", cluster_flags.seed, "seed echoed into the report");
  cluster_cmd->add_option("--output-dir", cluster_output, "directory for report.json + labels.csv")
      ->capture_default_str();
  cluster_cmd->add_option("--threads", cluster_flags.threads, "worker threads (0 = auto)")
      ->capture_default_str();

  CommonFlags density_flags;
  std::string density_grid = "auto";
  std::string density_output = ".";
  auto* density_cmd = app.add_subcommand("density", "evaluate the KDE on a regular grid");
  add_data_flags(density_cmd, density_flags, true);
  add_bandwidth_flags(density_cmd, density_flags);
  density_cmd->add_option("--grid-res", density_grid,
                          "'auto', '<lon>x<lat>' (spheres) or a point count (circles)")
      ->capture_default_str();
  density_cmd->add_option("--output-dir", density_output, "directory for grid.csv + report.json")
      ->capture_default_str();
  density_cmd->add_option("--threads", density_flags.threads, "worker threads (0 = auto)")
      ->capture_default_str();

  CommonFlags simulate_flags;
  std::string scenario;
  int simulate_n = 0;
  int simulate_q = 3;
  int simulate_repeats = 1;
  bool simulate_blurring = false;
  std::string simulate_output = ".";
  auto* simulate_cmd =
      app.add_subcommand("simulate", "sample a synthetic scenario and score the clustering");
  simulate_cmd
      ->add_option("--scenario", scenario, "circular, sphere1, sphere3, or hyperq")
      ->required();
  simulate_cmd->add_option("--n", simulate_n, "sample size (0 = scenario default)")
      ->capture_default_str();
  simulate_cmd->add_option("--q", simulate_q, "sphere dimension for hyperq (3..12)")
      ->capture_default_str();
  simulate_cmd->add_option("--repeats", simulate_repeats, "independent repetitions")
      ->capture_default_str();
  simulate_flags.seed_option =
      simulate_cmd->add_option("--seed", simulate_flags.seed, "RNG seed (generated if omitted)");
  add_bandwidth_flags(simulate_cmd, simulate_flags);
  add_iteration_flags(simulate_cmd, simulate_flags);
  simulate_cmd->add_flag("--blurring", simulate_blurring,
                         "use the blurring variant for the clustering passes");
  simulate_cmd
      ->add_option("--output-dir", simulate_output,
                   "directory for dataset.csv, rates.csv, report.json")
      ->capture_default_str();
  simulate_cmd->add_option("--threads", simulate_flags.threads, "worker threads (0 = auto)")
      ->capture_default_str();

  CommonFlags verify_flags;
  auto* verify_cmd =
      app.add_subcommand("verify", "run the numerical self-check suite against a dataset");
  add_data_flags(verify_cmd, verify_flags, true);
  add_bandwidth_flags(verify_cmd, verify_flags);
  add_iteration_flags(verify_cmd, verify_flags);
  verify_flags.seed_option =
      verify_cmd->add_option("--seed", verify_flags.seed, "seed for the probe points");
  verify_cmd->add_option("--threads", verify_flags.threads, "worker threads (0 = auto)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);

    if (cluster_cmd->parsed()) {
      dirms::cli::ClusterOptions options;
      options.data = make_data_options(cluster_flags);
      options.bandwidth =
          dirms::cli::BandwidthSpec::parse(cluster_flags.bandwidth, cluster_flags.bandwidth_scale);
      options.kernel = cluster_flags.kernel;
      options.tol = cluster_flags.tol;
      options.max_iter = cluster_flags.max_iter;
      options.merge_tol = cluster_flags.merge_tol;
      options.blurring = cluster_blurring;
      options.seed = make_seed(cluster_flags);
      options.output_dir = cluster_output;
      options.threads = resolve_threads(cluster_flags.threads);
      return dirms::cli::cmd_cluster(options);
    }
    if (density_cmd->parsed()) {
      dirms::cli::DensityOptions options;
      options.data = make_data_options(density_flags);
      options.bandwidth =
          dirms::cli::BandwidthSpec::parse(density_flags.bandwidth, density_flags.bandwidth_scale);
      options.kernel = density_flags.kernel;
      options.grid_res = density_grid;
      options.output_dir = density_output;
      options.threads = resolve_threads(density_flags.threads);
      return dirms::cli::cmd_density(options);
    }
    if (simulate_cmd->parsed()) {
      dirms::cli::SimulateOptions options;
      options.scenario = scenario;
      options.n = simulate_n;
      options.q = simulate_q;
      options.repeats = simulate_repeats;
      options.seed = make_seed(simulate_flags);
      options.bandwidth = dirms::cli::BandwidthSpec::parse(simulate_flags.bandwidth,
                                                           simulate_flags.bandwidth_scale);
      options.kernel = simulate_flags.kernel;
      options.tol = simulate_flags.tol;
      options.max_iter = simulate_flags.max_iter;
      options.merge_tol = simulate_flags.merge_tol;
      options.blurring = simulate_blurring;
      options.output_dir = simulate_output;
      options.threads = resolve_threads(simulate_flags.threads);
      return dirms::cli::cmd_simulate(options);
    }
    if (verify_cmd->parsed()) {
      dirms::cli::VerifyOptions options;
      options.data = make_data_options(verify_flags);
      options.bandwidth =
          dirms::cli::BandwidthSpec::parse(verify_flags.bandwidth, verify_flags.bandwidth_scale);
      options.kernel = verify_flags.kernel;
      options.tol = verify_flags.tol;
      options.max_iter = verify_flags.max_iter;
      options.merge_tol = verify_flags.merge_tol;
      options.seed = verify_flags.seed_option->count() > 0 ? verify_flags.seed : 1;
      options.threads = resolve_threads(verify_flags.threads);
      return dirms::cli::cmd_verify(options, std::cout);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;  // help/version exit cleanly, usage errors are input errors
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
