#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "ntlab/error.hpp"
#include "ntlab/grid.hpp"

namespace ntlab {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary grid format assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw Error(ErrorCode::IoError, "truncated binary grid header");
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_csv(const GridFunction& f, std::ostream& out) {
  out << f.dim << ',' << f.n << ',' << (f.periodic ? 1 : 0) << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << f.values[i];
    out << (((i + 1) % f.n == 0) ? '\n' : ',');
  }
}

GridFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty grid CSV");
  int dim = 0, n = 0, periodic = 0;
  char c1 = 0, c2 = 0;
  std::istringstream hdr(line);
  if (!(hdr >> dim >> c1 >> n >> c2 >> periodic) || c1 != ',' || c2 != ',')
    throw Error(ErrorCode::IoError, "bad grid CSV header '" + line + "'");
  GridFunction f(dim, n, periodic != 0);
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (k >= f.size()) throw Error(ErrorCode::IoError, "too many values in grid CSV");
      f.values[k++] = std::stod(cell);
    }
  }
  if (k != f.size()) throw Error(ErrorCode::IoError, "too few values in grid CSV");
  return f;
}

void write_binary(const GridFunction& f, std::ostream& out) {
  put_u32(out, static_cast<std::uint32_t>(f.dim));
  put_u32(out, f.periodic ? 1u : 0u);
  for (int a = 0; a < f.dim; ++a) put_u32(out, static_cast<std::uint32_t>(f.n));
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridFunction read_binary(std::istream& in) {
  const auto dim = static_cast<int>(get_u32(in));
  const bool periodic = get_u32(in) != 0;
  if (dim < 1 || dim > 3) throw Error(ErrorCode::IoError, "bad dimension in binary grid");
  int n = 0;
  for (int a = 0; a < dim; ++a) {
    const auto e = static_cast<int>(get_u32(in));
    if (a > 0 && e != n) throw Error(ErrorCode::IoError, "non-uniform extents are unsupported");
    n = e;
  }
  GridFunction f(dim, n, periodic);
  if (!in.read(reinterpret_cast<char*>(f.values.data()),
               static_cast<std::streamsize>(f.values.size() * sizeof(double))))
    throw Error(ErrorCode::IoError, "truncated binary grid payload");
  return f;
}

void save(const GridFunction& f, const std::string& path) {
  const bool csv = ends_with(path, ".csv");
  std::ofstream out(path, csv ? std::ios::out : std::ios::out | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  csv ? write_csv(f, out) : write_binary(f, out);
}

GridFunction load(const std::string& path) {
  const bool csv = ends_with(path, ".csv");
  std::ifstream in(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return csv ? read_csv(in) : read_binary(in);
}

}  // namespace ntlab
