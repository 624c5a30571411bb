#include "dirms/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dirms/bandwidth.hpp"

namespace dirms::cli {

namespace {

constexpr std::size_t kMaxIssues = 50;

std::string trim(const std::string& text) {
  std::size_t first = 0;
  std::size_t last = text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(text[last - 1]))) --last;
  return text.substr(first, last - first);
}

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

//! Strict double parse: the whole field must be consumed.
bool parse_double(const std::string& field, double& out) {
  const std::string text = trim(field);
  if (text.empty()) return false;
  const char* begin = text.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + text.size() && std::isfinite(out);
}

void note_issue(InputDataset& dataset, std::size_t line_number, const std::string& why) {
  ++dataset.rows_dropped;
  if (dataset.issues.size() < kMaxIssues) {
    dataset.issues.push_back("line " + std::to_string(line_number) + ": " + why);
  }
}

//! Column indices required by each format, resolved against the header.
struct ColumnPlan {
  std::vector<int> value_columns;  // lon,lat | x0..xq | theta
  int filter_column = -1;
  int ambient_dim = 0;
};

ColumnPlan plan_columns(const std::vector<std::string>& header, SourceFormat format,
                        const std::optional<MinFilter>& min_filter, const std::string& path) {
  auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(header[i]) == name) return static_cast<int>(i);
    }
    return -1;
  };

  ColumnPlan plan;
  switch (format) {
    case SourceFormat::lonlat_deg: {
      const int lon = find("lon");
      const int lat = find("lat");
      if (lon < 0 || lat < 0) {
        throw MalformedRow(path + ": lonlat_deg input needs 'lon' and 'lat' columns");
      }
      plan.value_columns = {lon, lat};
      plan.ambient_dim = 3;
      break;
    }
    case SourceFormat::cartesian: {
      for (int k = 0;; ++k) {
        const int column = find("x" + std::to_string(k));
        if (column < 0) break;
        plan.value_columns.push_back(column);
      }
      if (plan.value_columns.size() < 2) {
        throw MalformedRow(path + ": cartesian input needs contiguous columns x0..xq (q >= 1)");
      }
      plan.ambient_dim = static_cast<int>(plan.value_columns.size());
      break;
    }
    case SourceFormat::angles_rad: {
      const int theta = find("theta");
      if (theta < 0) throw MalformedRow(path + ": angles_rad input needs a 'theta' column");
      plan.value_columns = {theta};
      plan.ambient_dim = 2;
      break;
    }
  }
  if (min_filter) {
    plan.filter_column = find(lower(min_filter->column));
    if (plan.filter_column < 0) {
      throw MalformedRow(path + ": min-filter column '" + min_filter->column + "' not found");
    }
  }
  return plan;
}

}  // namespace

SourceFormat parse_source_format(const std::string& name) {
  const std::string key = lower(trim(name));
  if (key == "lonlat_deg") return SourceFormat::lonlat_deg;
  if (key == "cartesian") return SourceFormat::cartesian;
  if (key == "angles_rad") return SourceFormat::angles_rad;
  throw std::invalid_argument("unknown input format '" + name +
                              "' (expected lonlat_deg, cartesian, or angles_rad)");
}

std::string to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::lonlat_deg: return "lonlat_deg";
    case SourceFormat::cartesian: return "cartesian";
    case SourceFormat::angles_rad: return "angles_rad";
  }
  return "unknown";
}

InputDataset ingest(const std::string& path, SourceFormat format,
                    const std::optional<MinFilter>& min_filter) {
  std::ifstream file(path);
  if (!file) throw FileNotFound("cannot open input file: " + path);

  std::string line;
  if (!std::getline(file, line)) throw EmptyDataset(path + ": file has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  const ColumnPlan plan = plan_columns(header, format, min_filter, path);

  InputDataset dataset;
  dataset.source_format = format;
  dataset.path = path;

  std::vector<Vector> rows;
  std::size_t line_number = 1;
  while (std::getline(file, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      note_issue(dataset, line_number,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
      continue;
    }

    std::vector<double> values(plan.value_columns.size());
    bool ok = true;
    for (std::size_t k = 0; k < plan.value_columns.size(); ++k) {
      if (!parse_double(fields[static_cast<std::size_t>(plan.value_columns[k])], values[k])) {
        note_issue(dataset, line_number,
                   "unparsable number in column '" +
                       header[static_cast<std::size_t>(plan.value_columns[k])] + "'");
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    if (plan.filter_column >= 0) {
      double filter_value = 0.0;
      if (!parse_double(fields[static_cast<std::size_t>(plan.filter_column)], filter_value)) {
        note_issue(dataset, line_number, "unparsable number in filter column");
        continue;
      }
      if (filter_value < min_filter->threshold) {
        ++dataset.rows_filtered;
        continue;
      }
    }

    Vector point;
    switch (format) {
      case SourceFormat::lonlat_deg: {
        double lon = values[0];
        const double lat = values[1];
        if (std::abs(lat) > 90.0) {
          note_issue(dataset, line_number, "latitude out of [-90, 90]");
          continue;
        }
        if (lon > 180.0 && lon <= 360.0) lon -= 360.0;
        point = sphere::lonlat_to_unit(lon, lat).coords();
        break;
      }
      case SourceFormat::cartesian: {
        point = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        const double norm = point.norm();
        if (std::abs(norm - 1.0) > 1e-6) {
          note_issue(dataset, line_number, "row is not a unit vector (|norm - 1| > 1e-6)");
          continue;
        }
        point /= norm;
        break;
      }
      case SourceFormat::angles_rad: {
        point.resize(2);
        point << std::cos(values[0]), std::sin(values[0]);
        break;
      }
    }
    rows.push_back(std::move(point));
  }

  if (rows.empty()) {
    throw EmptyDataset(path + ": no valid data rows (" + std::to_string(dataset.rows_dropped) +
                       " dropped, " + std::to_string(dataset.rows_filtered) + " filtered)");
  }
  dataset.rows_kept = rows.size();
  dataset.points.resize(static_cast<Eigen::Index>(rows.size()), plan.ambient_dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dataset.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return dataset;
}

BandwidthSpec BandwidthSpec::parse(const std::string& text, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("bandwidth scale must be > 0");
  BandwidthSpec spec;
  spec.scale = scale;
  if (lower(trim(text)) == "auto") {
    spec.automatic = true;
    return spec;
  }
  double value = 0.0;
  if (!parse_double(text, value) || !(value > 0.0)) {
    throw std::invalid_argument("--bandwidth must be 'auto' or a positive number, got '" + text +
                                "'");
  }
  spec.automatic = false;
  spec.value = value;
  return spec;
}

double BandwidthSpec::resolve(const Matrix& points) const {
  if (!automatic) return value;
  return scale * bandwidth::rot_bandwidth(points, static_cast<int>(points.cols()) - 1).h;
}

kernels::DirectionalKernel kernel_by_name(const std::string& name) {
  const std::string key = lower(trim(name));
  if (key == "vonmises") return kernels::von_mises_kernel();
  if (key == "singular-test") {
    // Deliberately invalid: L(0) = ∞ violates the boundedness requirement,
    // so the verify command's kernel-validity check must reject it.
    kernels::DirectionalKernel kernel;
    kernel.name = "singular-test";
    kernel.eval = [](double r) { return 1.0 / r; };
    kernel.deriv = [](double r) { return -1.0 / (r * r); };
    kernel.deriv2 = [](double r) { return 2.0 / (r * r * r); };
    return kernel;
  }
  throw std::invalid_argument("unknown kernel '" + name +
                              "' (expected vonmises, or singular-test for verify)");
}

}  // namespace dirms::cli
