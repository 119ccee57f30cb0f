#include "ntlab/table.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ntlab/error.hpp"

#ifndef NTLAB_VERSION
#define NTLAB_VERSION "unknown"
#endif

namespace ntlab {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw Error(ErrorCode::DimensionError, "row has " + std::to_string(row.size()) + " cells, table has " +
                                               std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(17) << *d;
    return s.str();
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

std::string Table::csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory for '" + path + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

const char* library_version() noexcept { return NTLAB_VERSION; }

}  // namespace ntlab
