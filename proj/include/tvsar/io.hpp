#pragma once

#include <string>
#include <vector>

#include "tvsar/samplers.hpp"

namespace tvsar {

// Reads a univariate series: one numeric column with an optional header
// row; an optional second (timestamp) column is ignored. Parse failures
// name the offending row.
Vector read_series_csv(const std::string& path);

// Writes a single-column CSV with a header.
void write_series_csv(const std::string& path, const Vector& y,
                      const std::string& header = "y");

// Lossless numeric formatting (17 significant digits) used everywhere a
// value must round-trip exactly.
std::string format_double(double x);

// Persists a posterior archive as a directory: theta.csv / h.csv (one
// flattened row-major draw per row), sigma.csv, mu.csv, kappa.csv and
// manifest.json. Timings go to run.log so repeated runs with the same
// seed remain byte-identical.
void write_archive(const std::string& dir, const PosteriorDraws& draws,
                   int T, std::uint64_t seed, std::uint64_t config_hash);

PosteriorDraws read_archive(const std::string& dir);

// dimensions recorded in an archive manifest
struct ArchiveInfo {
  int T = 0;
  int r = 0;
  int n_draws = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};
ArchiveInfo read_archive_info(const std::string& dir);

// Centered moving-average detrend; the window is forced odd (rounded up)
// and edges use the partial-window average.
Vector detrend_moving_average(const Vector& y, int window);

}  // namespace tvsar
