#include "polynl/io.hpp"

#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "polynl/errors.hpp"

namespace polynl {

std::string strprintf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list args2;
  va_copy(args2, args);
  const int n = std::vsnprintf(nullptr, 0, fmt, args);
  va_end(args);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
  va_end(args2);
  return out;
}

std::string format_full(double v) { return strprintf("%.17g", v); }

void write_matrix(std::ostream& os, const Matrix<double>& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_full(m(i, j));
    }
    os << '\n';
  }
}

Matrix<double> read_matrix(std::istream& is) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols))
    throw ShapeError("read_matrix: malformed header");
  if (rows == 0 || cols == 0)
    throw ShapeError("read_matrix: zero-sized dimension");
  std::vector<double> data(rows * cols);
  for (double& v : data)
    if (!(is >> v)) throw ShapeError("read_matrix: truncated data");
  Matrix<double> m(rows, cols, std::move(data));
  m.require_finite("read_matrix");
  return m;
}

void write_matrix_file(const std::string& path, const Matrix<double>& m) {
  std::ofstream f(path);
  if (!f) throw ShapeError("write_matrix_file: cannot open " + path);
  write_matrix(f, m);
}

Matrix<double> read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ShapeError("read_matrix_file: cannot open " + path);
  return read_matrix(f);
}

}  // namespace polynl
