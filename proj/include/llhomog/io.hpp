#pragma once

// Deterministic text output: 17 significant digits, '.' decimal, '\n' endings.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace llh {

/// 17 significant digits, locale independent.
std::string format_real(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// First cell is a label ("summary", ...), the rest numbers.
  void row(const std::string& label, const std::vector<double>& values);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace llh
