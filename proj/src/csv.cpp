#include "fracspec/csv.hpp"

#include <cmath>
#include <cstdio>

#include "fracspec/error.hpp"

namespace fracspec {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto cell = line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t'))
      cell.remove_suffix(1);
    cells.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot write '" + path.string() + "'");
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) text(n);
  end_row();
}

CsvWriter& CsvWriter::real(double v) {
  separator();
  out_ << format_real(v);
  return *this;
}

CsvWriter& CsvWriter::integer(std::int64_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::text(std::string_view v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace fracspec
