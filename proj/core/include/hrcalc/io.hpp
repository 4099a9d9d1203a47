#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// Shortest round-trip decimal form of a double.
std::string format_real(double x);
double parse_real(std::string_view text);

// CSV with one line per matrix row, four reals (r,i,j,k) per entry. The header
// names the fields of the first row: q0_0_r,q0_0_i,...,q0_{n-1}_k; later rows
// reuse that column layout.
void write_qmatrix_csv(std::ostream& os, const QMatrix& a);
std::string qmatrix_to_csv(const QMatrix& a);

// Reads a header line and data rows up to a blank line, a line starting with
// '[' or end of input. Throws UsageError on malformed content.
QMatrix read_qmatrix_csv(std::istream& is);
QMatrix qmatrix_from_csv(const std::string& text);

}  // namespace hrcalc
