#include "ascr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ascr/error.hpp"

namespace ascr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_number(std::string_view s) {
  if (s.empty()) return true;
  double v = 0.0;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string where(const CsvTable& t, std::size_t row, std::size_t col) {
  return t.path + ": row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

// n x K numeric matrix (empty fields -> NaN) from a headerless or headed CSV.
std::vector<double> read_matrix(const std::string& path, std::size_t& rows, std::size_t& cols, CsvTable& table) {
  table = read_csv(path);
  rows = table.rows.size();
  cols = table.header.empty() ? (rows ? table.rows.front().size() : 0) : table.header.size();
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.push_back(parse_field(table.rows[i][j], where(table, i, j)).value_or(kNaN));
    }
  }
  return out;
}

void check_shape(const std::string& path, std::size_t rows, std::size_t cols, std::size_t want_rows,
                 std::size_t want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw DataError(path + ": expected " + std::to_string(want_rows) + " x " + std::to_string(want_cols) +
                    " values, found " + std::to_string(rows) + " x " + std::to_string(cols));
  }
}

void write_matrix(const std::string& path, std::size_t k, std::size_t n, auto&& cell) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < k; ++j) out << (j ? "," : "") << 's' << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) out << (j ? "," : "") << cell(i, j);
    out << '\n';
  }
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw DataError(path + ": missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path, std::optional<bool> header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable t;
  t.path = path;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (first) {
      first = false;
      width = fields.size();
      bool is_header = header.value_or(false);
      if (!header) {
        for (const auto& f : fields) is_header = is_header || !is_number(f);
      }
      if (is_header) {
        t.header = std::move(fields);
        continue;
      }
    }
    if (fields.size() != width) {
      throw DataError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(width));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

std::optional<double> parse_field(std::string_view field, const std::string& where) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  std::string_view s = field;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(where + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_bearing_degrees(double radians) {
  if (std::isnan(radians)) return {};
  const double direct = radians_to_degrees(radians);
  // the reading conversion is not an exact inverse; probe neighbouring doubles
  double up = direct, down = direct;
  for (int step = 0; step < 16; ++step) {
    if (degrees_to_radians(up) == radians) return format_number(up);
    if (degrees_to_radians(down) == radians) return format_number(down);
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
  }
  return format_number(direct);
}

SensorArray read_sensors(const std::string& path) {
  const CsvTable t = read_csv(path, true);
  const std::size_t e = t.column("easting");
  const std::size_t n = t.column("northing");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto x = parse_field(t.rows[i][e], where(t, i, e));
    const auto y = parse_field(t.rows[i][n], where(t, i, n));
    if (!x || !y) throw DataError(where(t, i, x ? n : e) + ": missing coordinate");
    pts.push_back({*x, *y});
  }
  if (pts.empty()) throw DataError(path + ": no sensors");
  try {
    return SensorArray(std::move(pts));
  } catch (const std::invalid_argument& err) {
    throw DataError(path + ": " + err.what());
  }
}

void write_sensors(const std::string& path, const SensorArray& array) {
  auto out = open_out(path);
  out << "sensor_id,easting,northing\n";
  for (std::size_t j = 0; j < array.size(); ++j) {
    out << (j + 1) << ',' << format_number(array[j].easting) << ',' << format_number(array[j].northing) << '\n';
  }
}

GriddedCovariates read_covariate_grid(const std::string& path) {
  const CsvTable t = read_csv(path, true);
  const std::size_t e = t.column("easting");
  const std::size_t n = t.column("northing");
  std::vector<std::string> names;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != e && c != n) {
      names.push_back(t.header[c]);
      cols.push_back(c);
    }
  }
  std::vector<Point> nodes;
  std::vector<std::vector<double>> values;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto x = parse_field(t.rows[i][e], where(t, i, e));
    const auto y = parse_field(t.rows[i][n], where(t, i, n));
    if (!x || !y) throw DataError(where(t, i, x ? n : e) + ": missing coordinate");
    nodes.push_back({*x, *y});
    std::vector<double> row;
    for (std::size_t c : cols) row.push_back(parse_field(t.rows[i][c], where(t, i, c)).value_or(kNaN));
    values.push_back(std::move(row));
  }
  try {
    return GriddedCovariates(std::move(names), nodes, values);
  } catch (const std::invalid_argument& err) {
    throw DataError(path + ": " + err.what());
  }
}

void write_mesh_csv(const std::string& path, const Mesh& mesh) {
  auto out = open_out(path);
  out << "cell_id,easting,northing,area";
  for (const auto& name : mesh.covariate_names()) out << ',' << name;
  out << '\n';
  for (std::size_t m = 0; m < mesh.size(); ++m) {
    const auto& c = mesh[m];
    out << (m + 1) << ',' << format_number(c.centroid.easting) << ',' << format_number(c.centroid.northing) << ','
        << format_number(c.area);
    for (double v : c.covariates) out << ',' << format_number(v);
    out << '\n';
  }
}

Mesh read_mesh_csv(const std::string& path) {
  const CsvTable t = read_csv(path, true);
  const std::size_t e = t.column("easting"), n = t.column("northing"), a = t.column("area");
  const std::size_t id = t.column("cell_id");
  std::vector<std::string> names;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != e && c != n && c != a && c != id) {
      names.push_back(t.header[c]);
      cols.push_back(c);
    }
  }
  std::vector<MeshCell> cells;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    MeshCell cell;
    const auto x = parse_field(t.rows[i][e], where(t, i, e));
    const auto y = parse_field(t.rows[i][n], where(t, i, n));
    const auto area = parse_field(t.rows[i][a], where(t, i, a));
    if (!x || !y || !area) throw DataError(path + ": row " + std::to_string(i + 1) + " lacks position or area");
    cell.centroid = {*x, *y};
    cell.area = *area;
    for (std::size_t c : cols) cell.covariates.push_back(parse_field(t.rows[i][c], where(t, i, c)).value_or(kNaN));
    cells.push_back(std::move(cell));
  }
  return Mesh(std::move(names), std::move(cells));
}

void write_density_csv(const std::string& path, const Mesh& mesh, const std::vector<double>& log_density) {
  if (log_density.size() != mesh.size()) throw std::invalid_argument("density values do not match the mesh");
  auto out = open_out(path);
  out << "cell_id,easting,northing,area,log_density,density\n";
  for (std::size_t m = 0; m < mesh.size(); ++m) {
    const auto& c = mesh[m];
    out << (m + 1) << ',' << format_number(c.centroid.easting) << ',' << format_number(c.centroid.northing) << ','
        << format_number(c.area) << ',' << format_number(log_density[m]) << ','
        << format_number(std::exp(log_density[m])) << '\n';
  }
}

void write_qcd_csv(const std::string& path, const Mesh& mesh, const std::vector<double>& qcd) {
  if (qcd.size() != mesh.size()) throw std::invalid_argument("QCD values do not match the mesh");
  auto out = open_out(path);
  out << "cell_id,easting,northing,qcd\n";
  for (std::size_t m = 0; m < mesh.size(); ++m) {
    out << (m + 1) << ',' << format_number(mesh[m].centroid.easting) << ','
        << format_number(mesh[m].centroid.northing) << ',' << format_number(qcd[m]) << '\n';
  }
}

DetectionFiles dataset_files(const std::string& dir, bool with_noise) {
  DetectionFiles f;
  f.detections = dir + "/detections.csv";
  f.bearings = dir + "/bearings.csv";
  f.received = dir + "/received.csv";
  if (with_noise) f.call_noise = dir + "/call_noise.csv";
  return f;
}

RawDetections read_raw_detections(const DetectionFiles& files) {
  if (files.detections.empty()) throw ConfigError("a detections file is required");
  if (files.received.empty()) throw ConfigError("a received-levels file is required");
  RawDetections raw;
  std::size_t n = 0, k = 0;
  CsvTable det_table;
  const auto det = read_matrix(files.detections, n, k, det_table);
  if (k == 0) throw DataError(files.detections + ": no sensor columns");
  raw.sensors = k;
  raw.detections.resize(n * k);
  for (std::size_t q = 0; q < det.size(); ++q) {
    if (det[q] != 0.0 && det[q] != 1.0) {
      throw DataError(where(det_table, q / k, q % k) + ": detections must be 0 or 1");
    }
    raw.detections[q] = det[q] == 1.0 ? 1 : 0;
  }

  auto companion = [&](const std::string& path, const char* what, bool bearings) {
    std::size_t rn = 0, rk = 0;
    CsvTable table;
    auto values = read_matrix(path, rn, rk, table);
    check_shape(path, rn, rk, n, k);
    for (std::size_t q = 0; q < values.size(); ++q) {
      const bool present = !std::isnan(values[q]);
      if (present != (raw.detections[q] == 1)) {
        throw DataError(where(table, q / k, q % k) + ": " + what +
                        (present ? " given for a non-detection" : " missing for a detection"));
      }
      if (bearings && present && !(values[q] >= 0.0 && values[q] < 360.0)) {
        throw DataError(where(table, q / k, q % k) + ": bearing " + format_number(values[q]) +
                        " outside [0, 360) degrees");
      }
    }
    return values;
  };
  raw.received = companion(files.received, "received level", false);
  if (files.bearings.empty()) {
    raw.bearings_deg.assign(n * k, kNaN);
  } else {
    raw.bearings_deg = companion(files.bearings, "bearing", true);
  }
  if (!files.call_noise.empty()) {
    std::size_t rn = 0, rk = 0;
    CsvTable table;
    raw.noise = read_matrix(files.call_noise, rn, rk, table);
    check_shape(files.call_noise, rn, rk, n, k);
    for (std::size_t q = 0; q < raw.noise.size(); ++q) {
      if (std::isnan(raw.noise[q])) throw DataError(where(table, q / k, q % k) + ": missing noise level");
    }
  }
  return raw;
}

std::pair<Dataset, TruncationReport> load_and_truncate(const RawDetections& raw, double t_r, int m_min) {
  if (m_min < 1) throw ConfigError("m_min must be at least 1");
  Dataset data;
  data.sensors = raw.sensors;
  data.m_min = m_min;
  TruncationReport report;
  report.raw_calls = raw.rows();
  const std::size_t k = raw.sensors;
  std::vector<std::uint8_t> w(k);
  std::vector<double> y(k), r(k), c;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    int count = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t q = i * k + j;
      w[j] = raw.detections[q];
      y[j] = kNaN;
      r[j] = kNaN;
      if (!w[j]) continue;
      if (raw.received[q] < t_r) {
        w[j] = 0;
        ++report.detections_removed;
        continue;
      }
      ++count;
      r[j] = raw.received[q];
      y[j] = std::isnan(raw.bearings_deg[q]) ? kNaN : degrees_to_radians(raw.bearings_deg[q]);
    }
    if (count == 0) {
      ++report.dropped_empty;
      continue;
    }
    if (count < m_min) {
      ++report.dropped_singletons;
      continue;
    }
    if (!raw.noise.empty()) c.assign(raw.noise.begin() + static_cast<std::ptrdiff_t>(i * k),
                                      raw.noise.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
    data.add_call(w, y, r, c);
    ++report.retained;
  }
  return {std::move(data), report};
}

void write_dataset(const Dataset& data, const DetectionFiles& files) {
  const std::size_t k = data.sensors, n = data.size();
  write_matrix(files.detections, k, n, [&](std::size_t i, std::size_t j) { return data.detected(i, j) ? 1 : 0; });
  write_matrix(files.received, k, n,
               [&](std::size_t i, std::size_t j) { return format_number(data.received_level(i, j)); });
  if (!files.bearings.empty()) {
    write_matrix(files.bearings, k, n,
                 [&](std::size_t i, std::size_t j) { return format_bearing_degrees(data.bearing(i, j)); });
  }
  if (data.has_noise() && !files.call_noise.empty()) {
    write_matrix(files.call_noise, k, n,
                 [&](std::size_t i, std::size_t j) { return format_number(data.noise[i * k + j]); });
  }
}

Dataset read_dataset(const DetectionFiles& files, int m_min, double period) {
  const RawDetections raw = read_raw_detections(files);
  auto [data, report] = load_and_truncate(raw, -std::numeric_limits<double>::infinity(), 1);
  if (report.dropped_empty > 0) throw DataError(files.detections + ": calls without detections");
  data.m_min = m_min;
  data.period = period;
  return data;
}

NoiseSample read_noise_sample(const std::string& path) {
  std::size_t n = 0, k = 0;
  CsvTable table;
  NoiseSample s;
  s.values = read_matrix(path, n, k, table);
  s.sensors = k;
  for (std::size_t q = 0; q < s.values.size(); ++q) {
    if (std::isnan(s.values[q])) throw DataError(where(table, q / k, q % k) + ": missing noise level");
  }
  if (n == 0) throw DataError(path + ": empty noise sample");
  return s;
}

void write_noise_sample(const std::string& path, const NoiseSample& sample) {
  write_matrix(path, sample.sensors, sample.rows(),
               [&](std::size_t i, std::size_t j) { return format_number(sample.at(i, j)); });
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace ascr
