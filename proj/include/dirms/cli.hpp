#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dirms/errors.hpp"
#include "dirms/kernels.hpp"
#include "dirms/sphere.hpp"

//! Command-line front end: CSV ingestion, the four subcommands (cluster,
//! density, simulate, verify), and their machine-readable outputs.
//!
//! The functions here are the testable core of the `dirms` executable: each
//! cmd_* takes a fully resolved options struct, performs all file I/O, and
//! returns the process exit code (0 success, 1 verification failure,
//! 2 partial convergence, 3 input error). The thin main() in
//! tools/dirms_main.cpp only parses argv into these structs.
namespace dirms::cli {

using sphere::Matrix;
using sphere::Vector;

//! The input file does not exist or cannot be opened.
class FileNotFound : public Error {
 public:
  using Error::Error;
};

//! The CSV header is unusable for the requested format (required columns
//! missing). Malformed *data* rows are never thrown — they are dropped,
//! counted, and reported in InputDataset::issues.
class MalformedRow : public Error {
 public:
  using Error::Error;
};

//! No valid data rows survived ingestion (empty file, or every row dropped).
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

//! cmd_simulate was asked for a scenario it does not know.
class UnknownScenario : public Error {
 public:
  using Error::Error;
};

//! How the input CSV encodes points.
//!  - lonlat_deg: columns lon,lat in degrees; longitudes in (180, 360] are
//!    shifted by −360, rows with |lat| > 90 are dropped.
//!  - cartesian: columns x0..xq; rows must already be unit to 1e-6 and are
//!    then normalized exactly.
//!  - angles_rad: column theta (radians), embedded as (cos θ, sin θ) on S¹.
enum class SourceFormat { lonlat_deg, cartesian, angles_rad };

//! Parses "lonlat_deg" / "cartesian" / "angles_rad"; throws
//! std::invalid_argument on anything else.
SourceFormat parse_source_format(const std::string& name);
std::string to_string(SourceFormat format);

//! Optional row filter: keep rows whose named extra CSV column is >= the
//! threshold (e.g. drop craters below a minimum diameter).
struct MinFilter {
  std::string column;
  double threshold = 0.0;
};

//! A parsed input file. Dropped rows are counted and carried as one-line
//! diagnostics — never silently ignored.
struct InputDataset {
  Matrix points;  // n×(q+1), unit rows
  SourceFormat source_format = SourceFormat::lonlat_deg;
  std::string path;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;    // parse failures, |lat| > 90, non-unit cartesian
  std::size_t rows_filtered = 0;   // removed by --min-filter (not counted as dropped)
  std::vector<std::string> issues; // one line per dropped row, capped at 50

  int q() const { return static_cast<int>(points.cols()) - 1; }
};

//! Reads a CSV file (UTF-8, header row, comma separators, '.' decimals).
//! Throws FileNotFound, MalformedRow (header-level), EmptyDataset.
InputDataset ingest(const std::string& path, SourceFormat format,
                    const std::optional<MinFilter>& min_filter = std::nullopt);

//! Input-file flags shared by cluster/density/verify.
struct DataOptions {
  std::string input;
  SourceFormat format = SourceFormat::lonlat_deg;
  std::optional<MinFilter> min_filter;
};

//! --bandwidth: either "auto" (rule-of-thumb estimate, optionally rescaled
//! by --bandwidth-scale) or an explicit positive value.
struct BandwidthSpec {
  bool automatic = true;
  double value = 0.0;  // used when !automatic
  double scale = 1.0;  // multiplier applied to the automatic choice

  //! Parses the --bandwidth argument text; throws std::invalid_argument on
  //! a non-positive or unparsable value.
  static BandwidthSpec parse(const std::string& text, double scale = 1.0);

  //! The bandwidth to use for the given data (runs the rule-of-thumb
  //! selector when automatic).
  double resolve(const Matrix& points) const;
};

//! Looks up a kernel by CLI name. "vonmises" is the production kernel;
//! "singular-test" is a deliberately invalid stub (L(0) = ∞) kept so that
//! `verify` can demonstrate the kernel-validity check failing cleanly.
kernels::DirectionalKernel kernel_by_name(const std::string& name);

struct ClusterOptions {
  DataOptions data;
  BandwidthSpec bandwidth;
  std::string kernel = "vonmises";
  double tol = 1e-7;
  int max_iter = 1000;
  double merge_tol = 1e-2;
  bool blurring = false;
  std::optional<std::uint64_t> seed;  // echoed in the report; generated if omitted
  std::string output_dir = ".";
  int threads = 1;
};

//! Runs mode clustering on an input file; writes report.json + labels.csv
//! into output_dir. Returns 0, or 2 when any point failed to converge (the
//! report is still written).
int cmd_cluster(const ClusterOptions& options);

struct DensityOptions {
  DataOptions data;
  BandwidthSpec bandwidth;
  std::string kernel = "vonmises";
  //! "auto", "<lon>x<lat>" (q = 2) or "<count>" (q = 1). auto = 181x91 / 512.
  std::string grid_res = "auto";
  std::string output_dir = ".";
  int threads = 1;
};

//! Evaluates the KDE on a regular grid; writes grid.csv (lon,lat,density
//! for q = 2; theta,density for q = 1) + report.json with the quadrature
//! mass of the written grid. Returns 0.
int cmd_density(const DensityOptions& options);

struct SimulateOptions {
  //! One of: circular, sphere1, sphere3, hyperq.
  std::string scenario;
  int n = 0;       // 0 = scenario default (60 for circular, 1000 otherwise)
  int q = 3;       // hyperq only, 3..12
  int repeats = 1;
  std::optional<std::uint64_t> seed;
  BandwidthSpec bandwidth;
  std::string kernel = "vonmises";
  double tol = 1e-7;
  int max_iter = 1000;
  double merge_tol = 1e-2;
  bool blurring = false;
  std::string output_dir = ".";
  int threads = 1;
};

//! Samples a synthetic scenario, clusters every repeat, and writes
//! dataset.csv (first repeat, with truth labels), rates.csv (per-repeat
//! misclassification + mean/sd rows) and report.json. The outputs are
//! byte-identical for a fixed seed. Returns 0; throws UnknownScenario.
int cmd_simulate(const SimulateOptions& options);

struct VerifyOptions {
  DataOptions data;
  BandwidthSpec bandwidth;
  std::string kernel = "vonmises";
  double tol = 1e-7;
  int max_iter = 1000;
  double merge_tol = 1e-2;
  std::uint64_t seed = 1;  // drives the probe-point choice
  int threads = 1;
};

//! Runs the numerical self-check suite against a dataset/config: kernel
//! validity, normalizing-constant cross-check, density mass, finite-
//! difference gradient/Hessian agreement, two-route Hessian equality,
//! ascent monotonicity, and (q <= 2) grid-search mode agreement. Prints one
//! "PASS/FAIL name (margin ...)" line per check to `out`; numerical
//! breakdowns (e.g. total underflow at a tiny bandwidth) are reported as
//! failures with diagnostics, never crashes. Returns 0 iff all checks pass,
//! else 1.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace dirms::cli
