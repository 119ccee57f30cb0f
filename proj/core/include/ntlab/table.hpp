#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ntlab {

using Cell = std::variant<double, std::int64_t, std::string>;

// Fixed-column table written as CSV with 17 significant digits.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const Cell& at(std::size_t row, std::size_t column) const { return rows_.at(row).at(column); }

  void write_csv(std::ostream& out) const;
  std::string csv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& cell);

// Writes `content` to `path`, creating parent directories; throws IoError.
void write_text_file(const std::string& path, const std::string& content);

const char* library_version() noexcept;

}  // namespace ntlab
