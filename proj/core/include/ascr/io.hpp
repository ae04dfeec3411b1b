#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ascr/dataset.hpp"
#include "ascr/geometry.hpp"
#include "ascr/mesh.hpp"
#include "ascr/snr.hpp"

namespace ascr {

/// Comma-separated table. Fields are trimmed; quoting is not supported.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;  // empty when the file has no header row
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws DataError naming the file when absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a CSV file. With `header` unset the first row is taken as a header
/// when any of its fields is non-numeric. Throws DataError on unreadable files
/// and ragged rows.
CsvTable read_csv(const std::string& path, std::optional<bool> header = std::nullopt);

/// Empty field -> nullopt; otherwise the number, or DataError naming `where`.
std::optional<double> parse_field(std::string_view field, const std::string& where);

/// Shortest text that reads back as exactly `value`; "" for NaN.
std::string format_number(double value);

/// Degrees text that converts back to exactly `radians` whenever such a
/// double exists next to the direct conversion.
std::string format_bearing_degrees(double radians);

/// Sensor positions: columns easting,northing (an id column is ignored).
SensorArray read_sensors(const std::string& path);
void write_sensors(const std::string& path, const SensorArray& array);

/// Regular covariate grid: columns easting,northing followed by covariates.
GriddedCovariates read_covariate_grid(const std::string& path);

/// cell_id,easting,northing,area,<covariates>
void write_mesh_csv(const std::string& path, const Mesh& mesh);
/// Reads a mesh written by write_mesh_csv.
Mesh read_mesh_csv(const std::string& path);
/// cell_id,easting,northing,area,log_density,density
void write_density_csv(const std::string& path, const Mesh& mesh, const std::vector<double>& log_density);
/// cell_id,easting,northing,qcd
void write_qcd_csv(const std::string& path, const Mesh& mesh, const std::vector<double>& qcd);

/// Detection-matrix file set. Empty paths mark absent optional files.
struct DetectionFiles {
  std::string detections;  // n x K of 0/1
  std::string bearings;    // degrees, empty where not detected; optional
  std::string received;    // dB, empty where not detected
  std::string call_noise;  // dB, n x K; optional
};

/// detections.csv, bearings.csv, received.csv and call_noise.csv in `dir`.
DetectionFiles dataset_files(const std::string& dir, bool with_noise);

/// Detection matrices as read, before thresholding. Bearings stay in degrees.
struct RawDetections {
  std::size_t sensors = 0;
  std::vector<std::uint8_t> detections;
  std::vector<double> bearings_deg;  // NaN where missing
  std::vector<double> received;      // NaN where missing
  std::vector<double> noise;         // empty or rows x K
  std::size_t rows() const { return sensors == 0 ? 0 : detections.size() / sensors; }
};

/// Reads and checks the matrices: equal shapes, 0/1 detections, bearings in
/// [0, 360) and values present exactly where detected. Errors name the file,
/// row and column.
RawDetections read_raw_detections(const DetectionFiles& files);

struct TruncationReport {
  std::size_t raw_calls = 0;
  std::size_t detections_removed = 0;  // detections below the threshold
  std::size_t dropped_empty = 0;       // no detection left
  std::size_t dropped_singletons = 0;  // detected, but on fewer than m_min sensors
  std::size_t retained = 0;
};

/// Sets sub-threshold detections to non-detections, then drops calls with
/// fewer than m_min detections. Bearings are converted to radians.
std::pair<Dataset, TruncationReport> load_and_truncate(const RawDetections& raw, double t_r, int m_min);

/// Writes the dataset matrices (noise only when present).
void write_dataset(const Dataset& data, const DetectionFiles& files);

/// Reads matrices written by write_dataset without thresholding.
Dataset read_dataset(const DetectionFiles& files, int m_min = 2, double period = 1.0);

/// b x K noise snapshots, dB.
NoiseSample read_noise_sample(const std::string& path);
void write_noise_sample(const std::string& path, const NoiseSample& sample);

/// Writes `text` to `path`, throwing DataError when the file cannot be written.
void write_text(const std::string& path, const std::string& text);

}  // namespace ascr
