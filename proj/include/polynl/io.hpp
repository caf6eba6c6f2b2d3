#pragma once

#include <iosfwd>
#include <string>

#include "polynl/matrix.hpp"

namespace polynl {

// printf into a std::string.
std::string strprintf(const char* fmt, ...);

// Full-precision decimal rendering of a double: round-trips exactly through
// read_matrix / strtod.
std::string format_full(double v);

// Matrix text fixture format: first line "<rows> <cols>", then one
// whitespace-separated row per line.
void write_matrix(std::ostream& os, const Matrix<double>& m);
Matrix<double> read_matrix(std::istream& is);

void write_matrix_file(const std::string& path, const Matrix<double>& m);
Matrix<double> read_matrix_file(const std::string& path);

}  // namespace polynl
