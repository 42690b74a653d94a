#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fracspec {

/// Full-precision scientific notation used for every numeric CSV/JSON cell.
std::string format_real(double v);

std::vector<std::string> split_csv_line(std::string_view line);

/// Row-oriented CSV writer: ',' separator, LF line endings, %.17e reals.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  CsvWriter& real(double v);
  CsvWriter& integer(std::int64_t v);
  CsvWriter& text(std::string_view v);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  bool row_started_ = false;
};

}  // namespace fracspec
