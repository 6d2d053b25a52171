// Bit-exact serialization: field snapshots (PFC1), CSV series, and key-value
// report files.
#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "cht/grid.hpp"

namespace cht {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr std::uint32_t kSnapshotVersion = 1;

// Little-endian binary snapshot: magic "PFC1", u32 version, u8 dim,
// u32 n per axis, f64 L per axis, f64 t, row-major f64 values.
void write_snapshot(const std::string& path, const Field& f, double t);
std::pair<Field, double> read_snapshot(const std::string& path);

// RFC-style CSV: comma separator, '.' decimal, header row, floats with 17
// significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

// (t, value) series from a two-column CSV with a header row.
std::pair<std::vector<double>, std::vector<double>> read_series_csv(
    const std::string& path);

std::string format_double(double v);  // %.17g

// Key-value report ("key = value" lines) with the artifact version and config
// hash up front.
class ReportWriter {
 public:
  ReportWriter(const std::string& path, std::uint64_t config_hash);
  void kv(const std::string& key, double value);
  void kv(const std::string& key, long value);
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, bool value);

 private:
  std::ofstream out_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace cht
