#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace churnlab {

/// Shortest text that round-trips a double at 17 significant digits.
std::string fmt_double(double v);

/// CSV emitter with a fixed schema: UTF-8, LF line endings, comma separator,
/// dot decimal. Rows must match the header width.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

  static std::string num(double v) { return fmt_double(v); }
  static std::string num(long long v) { return std::to_string(v); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// FNV-1a over raw bytes; used as the config content digest.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace churnlab
