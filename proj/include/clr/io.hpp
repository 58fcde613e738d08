#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace clr::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, or -1.
  int column(const std::string& name) const;
};

/// Numeric CSV with a single header line. Throws std::runtime_error on I/O or
/// parse failures (with the offending line number).
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest representation that round-trips a double.
std::string format_double(double v);

/// Opens `path` for writing, creating parent directories. Throws
/// std::runtime_error when the file cannot be created.
std::ofstream open_for_write(const std::filesystem::path& path);

}  // namespace clr::io
