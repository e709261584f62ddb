#pragma once

#include <string>
#include <vector>

namespace kyleot {

// 17-significant-digit decimal rendering, locale-independent.
std::string format_g17(double x);

// Minimal CSV emitter: one header row, %.17g cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void row(const std::vector<double>& values);
  const std::string& str() const { return buffer_; }
  void write_file(const std::string& path) const;

 private:
  std::size_t n_columns_;
  std::string buffer_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace kyleot
