#include "hrcalc/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "hrcalc/errors.hpp"

namespace hrcalc {

namespace {

constexpr char kComp[4] = {'r', 'i', 'j', 'k'};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw UsageError("not a number: '" + std::string(text) + "'");
  return v;
}

void write_qmatrix_csv(std::ostream& os, const QMatrix& a) {
  for (std::size_t c = 0; c < a.cols(); ++c)
    for (int k = 0; k < 4; ++k) {
      if (c || k) os << ',';
      os << "q0_" << c << '_' << kComp[k];
    }
  os << '\n';
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c)
      for (int k = 0; k < 4; ++k) {
        if (c || k) os << ',';
        os << format_real(a(r, c)[k]);
      }
    os << '\n';
  }
}

std::string qmatrix_to_csv(const QMatrix& a) {
  std::ostringstream os;
  write_qmatrix_csv(os, a);
  return os.str();
}

QMatrix read_qmatrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("matrix csv: missing header");
  const auto header = split(line, ',');
  if (header.size() % 4 != 0 || trim(line).empty())
    throw UsageError("matrix csv: header field count must be a positive multiple of 4");
  const std::size_t cols = header.size() / 4;
  for (std::size_t f = 0; f < header.size(); ++f) {
    const std::string_view h = header[f];
    const std::string suffix = "_" + std::to_string(f / 4) + "_" + kComp[f % 4];
    if (h.size() < 2 + suffix.size() || h.front() != 'q' ||
        h.substr(h.size() - suffix.size()) != suffix)
      throw UsageError("matrix csv: unexpected header field '" + std::string(h) + "'");
  }
  std::vector<Quaternion> data;
  std::size_t rows = 0;
  while (is.peek() != std::char_traits<char>::eof()) {
    const auto pos = is.tellg();
    if (!std::getline(is, line)) break;
    const auto t = trim(line);
    if (t.empty()) break;
    if (t.front() == '[') {
      is.seekg(pos);
      break;
    }
    const auto fields = split(t, ',');
    if (fields.size() != 4 * cols)
      throw UsageError("matrix csv: row " + std::to_string(rows) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(4 * cols));
    for (std::size_t c = 0; c < cols; ++c)
      data.emplace_back(parse_real(fields[4 * c]), parse_real(fields[4 * c + 1]),
                        parse_real(fields[4 * c + 2]), parse_real(fields[4 * c + 3]));
    ++rows;
  }
  QMatrix a(rows, cols);
  std::copy(data.begin(), data.end(), a.data().begin());
  return a;
}

QMatrix qmatrix_from_csv(const std::string& text) {
  std::istringstream is(text);
  return read_qmatrix_csv(is);
}

}  // namespace hrcalc
