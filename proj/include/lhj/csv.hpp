#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace lhj {

// Locale-independent scientific formatting with 17 significant digits, so CSV
// output is byte-identical across runs and environments.
std::string format_sci(double x);
std::string format_int(long long x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  // Cells are written verbatim; use format_sci/format_int for numbers.
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace lhj
