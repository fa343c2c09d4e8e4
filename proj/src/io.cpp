#include "tvsar/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tvsar {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(strip(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(*out);
}

void write_rows_csv(const std::string& path,
                    const std::vector<Vector>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const Vector& row : rows) {
    for (int i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << format_double(row[i]);
    }
    f << '\n';
  }
}

std::vector<Vector> read_rows_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<Vector> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    const auto fields = split_csv_line(line);
    Vector row(fields.size());
    for (size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], &row[int(i)])) {
        throw std::runtime_error(path + ": bad number at row " +
                                 std::to_string(lineno));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector flatten(const Matrix& m) {
  Vector v(m.size());
  int idx = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) v[idx++] = m(i, j);
  return v;
}

Matrix unflatten(const Vector& v, int rows, int cols) {
  if (v.size() != rows * cols) {
    throw std::runtime_error("archive row has unexpected length");
  }
  Matrix m(rows, cols);
  int idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v[idx++];
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Vector read_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(f, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    const auto fields = split_csv_line(line);
    double v;
    if (!parse_double(fields[0], &v)) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw std::runtime_error(path + ": bad number at row " +
                               std::to_string(lineno));
    }
    first = false;
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error(path + ": no data rows");
  return Eigen::Map<Vector>(values.data(), values.size());
}

void write_series_csv(const std::string& path, const Vector& y,
                      const std::string& header) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << header << '\n';
  for (int t = 0; t < y.size(); ++t) f << format_double(y[t]) << '\n';
}

void write_archive(const std::string& dir, const PosteriorDraws& draws,
                   int T, std::uint64_t seed, std::uint64_t config_hash) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("cannot create archive directory " + dir);
  }
  const int n = int(draws.theta.size());
  const int r = n ? int(draws.theta[0].cols()) : 0;

  std::vector<Vector> rows;
  rows.reserve(n);
  for (const Matrix& m : draws.theta) rows.push_back(flatten(m));
  write_rows_csv(dir + "/theta.csv", rows);
  rows.clear();
  for (const Matrix& m : draws.h) rows.push_back(flatten(m));
  write_rows_csv(dir + "/h.csv", rows);
  write_rows_csv(dir + "/sigma.csv", draws.sigma);
  write_rows_csv(dir + "/mu.csv", draws.mu);
  write_rows_csv(dir + "/kappa.csv", draws.kappa);

  json manifest;
  manifest["T"] = T;
  manifest["r"] = r;
  manifest["draws"] = n;
  manifest["seasons"] = draws.seasons;
  manifest["orders"] = draws.orders;
  manifest["seed"] = seed;
  manifest["config_hash"] = config_hash;
  manifest["sigma_kind"] =
      (n && draws.sigma[0].size() > 1) ? "path" : "static";
  std::vector<std::string> rates;
  for (int k = 0; k < draws.update_rates.size(); ++k) {
    rates.push_back(format_double(draws.update_rates[k]));
  }
  manifest["update_rates"] = rates;
  manifest["pgas_resample_events"] = draws.pgas_resample_events;
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot write manifest in " + dir);
  mf << manifest.dump(2) << '\n';
}

ArchiveInfo read_archive_info(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot read manifest in " + dir);
  json manifest = json::parse(mf);
  ArchiveInfo info;
  info.T = manifest.at("T").get<int>();
  info.r = manifest.at("r").get<int>();
  info.n_draws = manifest.at("draws").get<int>();
  info.seed = manifest.at("seed").get<std::uint64_t>();
  info.config_hash = manifest.at("config_hash").get<std::uint64_t>();
  return info;
}

PosteriorDraws read_archive(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot read manifest in " + dir);
  json manifest = json::parse(mf);
  const int T = manifest.at("T").get<int>();
  const int r = manifest.at("r").get<int>();

  PosteriorDraws out;
  out.seasons = manifest.at("seasons").get<std::vector<int>>();
  out.orders = manifest.at("orders").get<std::vector<int>>();
  out.pgas_resample_events = manifest.value("pgas_resample_events", 0);
  const auto rates = manifest.at("update_rates").get<std::vector<std::string>>();
  out.update_rates.resize(rates.size());
  for (size_t k = 0; k < rates.size(); ++k) {
    out.update_rates[int(k)] = std::stod(rates[k]);
  }

  for (const Vector& row : read_rows_csv(dir + "/theta.csv")) {
    out.theta.push_back(unflatten(row, T + 1, r));
  }
  for (const Vector& row : read_rows_csv(dir + "/h.csv")) {
    out.h.push_back(unflatten(row, T + 1, r));
  }
  out.sigma = read_rows_csv(dir + "/sigma.csv");
  out.mu = read_rows_csv(dir + "/mu.csv");
  out.kappa = read_rows_csv(dir + "/kappa.csv");
  return out;
}

Vector detrend_moving_average(const Vector& y, int window) {
  if (window < 1) throw std::invalid_argument("window must be positive");
  if (window % 2 == 0) ++window;
  const int T = int(y.size());
  const int half = window / 2;
  Vector out(T);
  for (int t = 0; t < T; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(T - 1, t + half);
    out[t] = y[t] - y.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

}  // namespace tvsar
