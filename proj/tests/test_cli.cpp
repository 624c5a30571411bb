#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dirms/bandwidth.hpp"
#include "dirms/cli.hpp"
#include "dirms/sampling.hpp"
#include "dirms/sphere.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace dirms;
using nlohmann::json;
using sphere::Matrix;
using sphere::UnitVector;
using sphere::Vector;

namespace {

namespace fs = std::filesystem;

//! Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("dirms_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json(const std::string& path) { return json::parse(read_file(path)); }

//! Writes a lon/lat CSV with three tight clusters (12 points each).
std::string write_three_group_csv(const TempDir& dir) {
  std::ostringstream csv;
  csv << "lon,lat\n";
  const double centers[3][2] = {{0.0, 0.0}, {120.0, 15.0}, {-100.0, -40.0}};
  const double jitter[12][2] = {{0, 0},   {4, 2},  {-3, 5}, {2, -4}, {-5, -2}, {5, 4},
                                {-2, -5}, {3, 3},  {-4, 1}, {1, 5},  {4, -3},  {-1, -1}};
  for (const auto& center : centers) {
    for (const auto& j : jitter) {
      csv << center[0] + j[0] << "," << center[1] + j[1] << "\n";
    }
  }
  std::string path = dir.file("three_groups.csv");
  write_file(path, csv.str());
  return path;
}

//! Writes a Cartesian CSV sampled from a single concentrated component.
std::string write_vmf_csv(const TempDir& dir, std::uint64_t seed, int n, double nu) {
  sampling::SeededRng rng(seed);
  Matrix data = sampling::sample_vmf(sphere::lonlat_to_unit(30, 45), nu, n, rng);
  std::ostringstream csv;
  csv << "x0,x1,x2\n";
  csv.precision(17);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    csv << data(i, 0) << "," << data(i, 1) << "," << data(i, 2) << "\n";
  }
  std::string path = dir.file("vmf_sample.csv");
  write_file(path, csv.str());
  return path;
}

}  // namespace

TEST_CASE("source format names round-trip") {
  CHECK(cli::parse_source_format("lonlat_deg") == cli::SourceFormat::lonlat_deg);
  CHECK(cli::parse_source_format("cartesian") == cli::SourceFormat::cartesian);
  CHECK(cli::parse_source_format("angles_rad") == cli::SourceFormat::angles_rad);
  CHECK_THROWS_AS(cli::parse_source_format("geojson"), std::invalid_argument);
  for (auto format : {cli::SourceFormat::lonlat_deg, cli::SourceFormat::cartesian,
                      cli::SourceFormat::angles_rad}) {
    CHECK(cli::parse_source_format(cli::to_string(format)) == format);
  }
}

TEST_CASE("lon/lat ingestion applies the wraparound convention") {
  TempDir dir;
  std::string path = dir.file("points.csv");
  write_file(path, "lon,lat\n270,0\n0,90\n45,45\n");
  cli::InputDataset data = cli::ingest(path, cli::SourceFormat::lonlat_deg);

  REQUIRE(data.rows_kept == 3);
  CHECK(data.rows_dropped == 0);
  CHECK(data.q() == 2);
  // Longitude 270 lies in (180, 360] and is shifted to -90: due "west".
  CHECK((data.points.row(0).transpose() - Vector{{0.0, -1.0, 0.0}}).norm() <= 1e-12);
  CHECK((data.points.row(1).transpose() - Vector{{0.0, 0.0, 1.0}}).norm() <= 1e-12);
  CHECK((data.points.row(2).transpose() -
         sphere::lonlat_to_unit(45, 45).coords()).norm() <= 1e-12);
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    CHECK(data.points.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("bad rows are dropped, counted and described") {
  TempDir dir;
  std::string path = dir.file("points.csv");
  write_file(path,
             "lon,lat\n"
             "10,20\n"
             "abc,12\n"     // unparsable longitude
             "30,95\n"      // latitude out of range
             "40,-91\n"     // latitude out of range
             "50,60\n");
  cli::InputDataset data = cli::ingest(path, cli::SourceFormat::lonlat_deg);
  CHECK(data.rows_kept == 2);
  CHECK(data.rows_dropped == 3);
  CHECK(data.points.rows() == 2);
  CHECK(data.issues.size() == 3);
}

TEST_CASE("cartesian ingestion accepts unit rows and rejects the rest") {
  TempDir dir;
  std::string path = dir.file("points.csv");
  write_file(path,
             "x0,x1,x2\n"
             "0.6,0.8,0\n"
             "1,0,0\n"
             "0.5,0.5,0.5\n");  // norm 0.866: not a direction
  cli::InputDataset data = cli::ingest(path, cli::SourceFormat::cartesian);
  CHECK(data.rows_kept == 2);
  CHECK(data.rows_dropped == 1);
  CHECK((data.points.row(0).transpose() - Vector{{0.6, 0.8, 0.0}}).norm() <= 1e-12);
}

TEST_CASE("angle ingestion embeds onto the circle") {
  TempDir dir;
  std::string path = dir.file("angles.csv");
  write_file(path, "theta\n0\n1.5707963267948966\n-3.141592653589793\n");
  cli::InputDataset data = cli::ingest(path, cli::SourceFormat::angles_rad);
  REQUIRE(data.rows_kept == 3);
  CHECK(data.q() == 1);
  CHECK((data.points.row(0).transpose() - Vector{{1.0, 0.0}}).norm() <= 1e-12);
  CHECK((data.points.row(1).transpose() - Vector{{0.0, 1.0}}).norm() <= 1e-12);
  CHECK((data.points.row(2).transpose() - Vector{{-1.0, 0.0}}).norm() <= 1e-12);
}

TEST_CASE("ingestion failure modes") {
  TempDir dir;
  CHECK_THROWS_AS(cli::ingest(dir.file("missing.csv"), cli::SourceFormat::lonlat_deg),
                  cli::FileNotFound);

  std::string header_only = dir.file("header_only.csv");
  write_file(header_only, "lon,lat\n");
  CHECK_THROWS_AS(cli::ingest(header_only, cli::SourceFormat::lonlat_deg), cli::EmptyDataset);

  std::string all_bad = dir.file("all_bad.csv");
  write_file(all_bad, "lon,lat\nx,y\n10,99\n");
  CHECK_THROWS_AS(cli::ingest(all_bad, cli::SourceFormat::lonlat_deg), cli::EmptyDataset);

  std::string wrong_header = dir.file("wrong_header.csv");
  write_file(wrong_header, "longitude,latitude\n10,20\n");
  CHECK_THROWS_AS(cli::ingest(wrong_header, cli::SourceFormat::lonlat_deg), cli::MalformedRow);
}

TEST_CASE("minimum-value filter trims rows without calling them bad") {
  TempDir dir;
  std::string path = dir.file("craters.csv");
  write_file(path,
             "lon,lat,diameter\n"
             "10,10,12.5\n"
             "20,20,3.0\n"
             "30,30,5.0\n"
             "40,40,4.9\n");
  cli::MinFilter filter{"diameter", 5.0};
  cli::InputDataset data = cli::ingest(path, cli::SourceFormat::lonlat_deg, filter);
  CHECK(data.rows_kept == 2);
  CHECK(data.rows_filtered == 2);
  CHECK(data.rows_dropped == 0);

  cli::MinFilter missing{"depth", 1.0};
  CHECK_THROWS_AS(cli::ingest(path, cli::SourceFormat::lonlat_deg, missing), cli::MalformedRow);
}

TEST_CASE("bandwidth argument parsing and resolution") {
  cli::BandwidthSpec automatic = cli::BandwidthSpec::parse("auto");
  CHECK(automatic.automatic);
  cli::BandwidthSpec manual = cli::BandwidthSpec::parse("0.3");
  CHECK_FALSE(manual.automatic);
  CHECK(manual.value == doctest::Approx(0.3));
  CHECK_THROWS_AS(cli::BandwidthSpec::parse("wide"), std::invalid_argument);
  CHECK_THROWS_AS(cli::BandwidthSpec::parse("-0.2"), std::invalid_argument);
  CHECK_THROWS_AS(cli::BandwidthSpec::parse("0"), std::invalid_argument);

  sampling::SeededRng rng(5);
  Matrix data = sampling::sample_vmf(UnitVector{testutil::basis(3, 2)}, 4.0, 120, rng);
  double expected = bandwidth::rot_bandwidth(data, 2).h;
  CHECK(automatic.resolve(data) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(manual.resolve(data) == doctest::Approx(0.3).epsilon(1e-14));
  cli::BandwidthSpec scaled = cli::BandwidthSpec::parse("auto", 0.5);
  CHECK(scaled.resolve(data) == doctest::Approx(0.5 * expected).epsilon(1e-14));
}

TEST_CASE("kernel lookup by CLI name") {
  kernels::DirectionalKernel vonmises = cli::kernel_by_name("vonmises");
  CHECK(vonmises.name == "von_mises");
  CHECK_NOTHROW(kernels::validate_kernel(vonmises));

  kernels::DirectionalKernel singular = cli::kernel_by_name("singular-test");
  CHECK_THROWS_AS(kernels::validate_kernel(singular), kernels::InvalidKernel);

  CHECK_THROWS_AS(cli::kernel_by_name("tophat"), std::invalid_argument);
}

TEST_CASE("cluster command writes a reproducible report") {
  TempDir dir;
  std::string input = write_three_group_csv(dir);

  cli::ClusterOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::lonlat_deg;
  options.bandwidth = cli::BandwidthSpec::parse("auto");
  options.seed = 7;
  options.output_dir = dir.file("run1");
  REQUIRE(cli::cmd_cluster(options) == 0);

  json report = read_json(dir.file("run1/report.json"));
  CHECK(report.at("command") == "cluster");
  CHECK(report.at("config").at("seed").get<std::uint64_t>() == 7);
  CHECK(report.at("input").at("rows_kept").get<int>() == 36);
  CHECK(report.at("results").at("n_modes").get<int>() == 3);
  CHECK(report.at("all_converged").get<bool>());
  // The automatic bandwidth is echoed and reproducible from the input alone.
  cli::InputDataset data = cli::ingest(input, cli::SourceFormat::lonlat_deg);
  CHECK(report.at("config").at("bandwidth").at("h").get<double>() ==
        doctest::Approx(bandwidth::rot_bandwidth(data.points, 2).h).epsilon(1e-12));
  // Modes are reported in lon/lat degrees for sphere data.
  for (const auto& mode : report.at("results").at("modes")) {
    CHECK(mode.contains("lon"));
    CHECK(mode.contains("lat"));
  }

  std::string labels = read_file(dir.file("run1/labels.csv"));
  CHECK(labels.rfind("row,label", 0) == 0);
  // Header plus one line per kept row.
  CHECK(std::count(labels.begin(), labels.end(), '\n') == 37);

  // Identical rerun: the labels file is byte-identical (round-trip contract).
  options.output_dir = dir.file("run2");
  REQUIRE(cli::cmd_cluster(options) == 0);
  CHECK(read_file(dir.file("run2/labels.csv")) == labels);
  json rerun = read_json(dir.file("run2/report.json"));
  CHECK(rerun.at("results").at("modes") == report.at("results").at("modes"));
}

TEST_CASE("cluster command reports partial convergence with exit 2") {
  TempDir dir;
  std::string input = write_three_group_csv(dir);

  cli::ClusterOptions options;
  options.data.input = input;
  options.bandwidth = cli::BandwidthSpec::parse("auto");
  options.max_iter = 1;
  options.tol = 1e-13;
  options.seed = 7;
  options.output_dir = dir.file("capped");
  CHECK(cli::cmd_cluster(options) == 2);
  json report = read_json(dir.file("capped/report.json"));
  CHECK_FALSE(report.at("all_converged").get<bool>());
  CHECK(report.at("results").at("unassigned").get<int>() > 0);
  CHECK(fs::exists(dir.file("capped/labels.csv")));
}

TEST_CASE("density command: sphere grid integrates to one") {
  TempDir dir;
  std::string input = write_vmf_csv(dir, 11, 80, 6.0);

  cli::DensityOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::cartesian;
  options.bandwidth = cli::BandwidthSpec::parse("auto");
  options.output_dir = dir.file("density");
  REQUIRE(cli::cmd_density(options) == 0);

  json report = read_json(dir.file("density/report.json"));
  CHECK(report.at("mass").get<double>() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(report.at("config").at("grid").at("lon_res").get<int>() == 181);
  CHECK(report.at("config").at("grid").at("lat_res").get<int>() == 91);

  std::string grid = read_file(dir.file("density/grid.csv"));
  CHECK(grid.rfind("lon,lat,density", 0) == 0);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 181 * 91 + 1);
}

TEST_CASE("density command: single datum puts the peak cell at the datum") {
  TempDir dir;
  std::string input = dir.file("single.csv");
  write_file(input, "lon,lat\n45,30\n");

  cli::DensityOptions options;
  options.data.input = input;
  options.bandwidth = cli::BandwidthSpec::parse("0.4");
  options.output_dir = dir.file("density");
  REQUIRE(cli::cmd_density(options) == 0);

  std::ifstream grid(dir.file("density/grid.csv"));
  std::string line;
  std::getline(grid, line);  // header
  double best_lon = 0.0, best_lat = 0.0, best_density = -1.0;
  while (std::getline(grid, line)) {
    double lon, lat, density;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &lon, &lat, &density) == 3);
    if (density > best_density) {
      best_density = density;
      best_lon = lon;
      best_lat = lat;
    }
  }
  CHECK(best_lon == doctest::Approx(45.0).epsilon(0.03));
  CHECK(best_lat == doctest::Approx(30.0).epsilon(0.04));
}

TEST_CASE("density command: circle grid integrates to one") {
  TempDir dir;
  sampling::SeededRng rng(3);
  std::vector<double> angles = sampling::sample_circular_f1(100, rng);
  std::ostringstream csv;
  csv << "theta\n";
  csv.precision(17);
  for (double a : angles) csv << a << "\n";
  std::string input = dir.file("angles.csv");
  write_file(input, csv.str());

  cli::DensityOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::angles_rad;
  options.bandwidth = cli::BandwidthSpec::parse("0.3");
  options.grid_res = "720";
  options.output_dir = dir.file("density");
  REQUIRE(cli::cmd_density(options) == 0);

  json report = read_json(dir.file("density/report.json"));
  CHECK(report.at("mass").get<double>() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(report.at("config").at("grid").at("res").get<int>() == 720);
  std::string grid = read_file(dir.file("density/grid.csv"));
  CHECK(grid.rfind("theta,density", 0) == 0);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 721);
}

TEST_CASE("simulate command is deterministic and self-documenting") {
  TempDir dir;
  cli::SimulateOptions options;
  options.scenario = "sphere3";
  options.repeats = 2;
  options.seed = 42;
  options.output_dir = dir.file("sim1");
  REQUIRE(cli::cmd_simulate(options) == 0);

  json report = read_json(dir.file("sim1/report.json"));
  CHECK(report.at("scenario") == "sphere3");
  CHECK(report.at("n").get<int>() == 1000);  // scenario default
  CHECK(report.at("repeats").get<int>() == 2);

  std::string rates = read_file(dir.file("sim1/rates.csv"));
  CHECK(rates.rfind("repeat,clusters,misclassification", 0) == 0);
  // 2 repeat rows + mean and sd summary rows.
  CHECK(std::count(rates.begin(), rates.end(), '\n') == 5);

  std::string dataset = read_file(dir.file("sim1/dataset.csv"));
  CHECK(dataset.rfind("lon,lat,label", 0) == 0);
  CHECK(std::count(dataset.begin(), dataset.end(), '\n') == 1001);

  options.output_dir = dir.file("sim2");
  REQUIRE(cli::cmd_simulate(options) == 0);
  CHECK(read_file(dir.file("sim2/rates.csv")) == rates);
  CHECK(read_file(dir.file("sim2/dataset.csv")) == dataset);

  cli::SimulateOptions unknown = options;
  unknown.scenario = "torus";
  CHECK_THROWS_AS(cli::cmd_simulate(unknown), cli::UnknownScenario);
}

TEST_CASE("verify command passes on healthy input") {
  TempDir dir;
  std::string input = write_vmf_csv(dir, 19, 60, 5.0);

  cli::VerifyOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::cartesian;
  options.bandwidth = cli::BandwidthSpec::parse("auto");
  std::ostringstream out;
  CHECK(cli::cmd_verify(options, out) == 0);
  std::string text = out.str();
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

TEST_CASE("verify command reports numerical breakdown without crashing") {
  TempDir dir;
  std::string input = write_vmf_csv(dir, 23, 50, 5.0);

  cli::VerifyOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::cartesian;
  options.bandwidth = cli::BandwidthSpec::parse("0.000001");
  std::ostringstream out;
  CHECK(cli::cmd_verify(options, out) == 1);
  CHECK(out.str().find("FAIL") != std::string::npos);
}

TEST_CASE("verify command flags an invalid kernel cleanly") {
  TempDir dir;
  std::string input = write_vmf_csv(dir, 29, 50, 5.0);

  cli::VerifyOptions options;
  options.data.input = input;
  options.data.format = cli::SourceFormat::cartesian;
  options.bandwidth = cli::BandwidthSpec::parse("0.4");
  options.kernel = "singular-test";
  std::ostringstream out;
  CHECK(cli::cmd_verify(options, out) == 1);
  std::string text = out.str();
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("kernel") != std::string::npos);
}
