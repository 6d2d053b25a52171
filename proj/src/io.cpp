#include "cht/io.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace cht {

namespace {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: truncated file");
  return v;
}

}  // namespace

void write_snapshot(const std::string& path, const Field& f, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
  out.write("PFC1", 4);
  put(out, kSnapshotVersion);
  put(out, static_cast<std::uint8_t>(f.grid.dim));
  for (int a = 0; a < f.grid.dim; ++a) put(out, static_cast<std::uint32_t>(f.grid.n[a]));
  for (int a = 0; a < f.grid.dim; ++a) put(out, f.grid.length[a]);
  put(out, t);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("snapshot: write failed for " + path);
}

std::pair<Field, double> read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PFC1", 4) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion)
    throw std::runtime_error("snapshot: unsupported version in " + path);
  const auto dim = get<std::uint8_t>(in);
  if (dim != 1 && dim != 2) throw std::runtime_error("snapshot: bad dimension in " + path);
  std::uint32_t n[2] = {1, 1};
  double len[2] = {1.0, 1.0};
  for (int a = 0; a < dim; ++a) n[a] = get<std::uint32_t>(in);
  for (int a = 0; a < dim; ++a) len[a] = get<double>(in);
  const double t = get<double>(in);
  Grid g = dim == 1 ? Grid::line(static_cast<int>(n[0]), len[0])
                    : Grid::rect(static_cast<int>(n[0]), static_cast<int>(n[1]),
                                 len[0], len[1]);
  Field f(g);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("snapshot: truncated values in " + path);
  return {std::move(f), t};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), n_cols_(header.size()) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::vector<double>(values));
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_) throw std::logic_error("csv: column count mismatch");
  std::size_t i = 0;
  for (double v : values) {
    if (i++) out_ << ',';
    out_ << format_double(v);
  }
  out_ << '\n';
}

std::pair<std::vector<double>, std::vector<double>> read_series_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw std::runtime_error("csv: expected two columns in " + path);
    t.push_back(std::stod(a));
    v.push_back(std::stod(b));
  }
  return {std::move(t), std::move(v)};
}

ReportWriter::ReportWriter(const std::string& path, std::uint64_t config_hash)
    : out_(path) {
  if (!out_) throw std::runtime_error("report: cannot open " + path + " for writing");
  out_ << "artifact_version = " << kArtifactVersion << '\n';
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
  out_ << "config_hash = " << buf << '\n';
}

void ReportWriter::kv(const std::string& key, double value) {
  out_ << key << " = " << format_double(value) << '\n';
}
void ReportWriter::kv(const std::string& key, long value) {
  out_ << key << " = " << value << '\n';
}
void ReportWriter::kv(const std::string& key, const std::string& value) {
  out_ << key << " = " << value << '\n';
}
void ReportWriter::kv(const std::string& key, bool value) {
  out_ << key << " = " << (value ? "true" : "false") << '\n';
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cht
