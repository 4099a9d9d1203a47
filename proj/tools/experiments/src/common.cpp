#include "hrcalc/experiments/common.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/version.hpp"

namespace hrcalc::experiments {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ParamSet::declare(const std::string& key, const std::string& default_value,
                       const std::string& help) {
  entries_[key] = {default_value, help};
}

void ParamSet::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw UsageError("unknown parameter '" + key + "'");
  it->second.value = value;
}

bool ParamSet::has(const std::string& key) const { return entries_.count(key) != 0; }

const ParamSet::Entry& ParamSet::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw UsageError("undeclared parameter '" + key + "'");
  return it->second;
}

const std::string& ParamSet::text(const std::string& key) const { return entry(key).value; }

double ParamSet::real(const std::string& key) const {
  try {
    return parse_real(text(key));
  } catch (const UsageError&) {
    throw UsageError("parameter '" + key + "' must be a real number, got '" + text(key) + "'");
  }
}

std::uint64_t ParamSet::u64(const std::string& key) const {
  const std::string& v = text(key);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw UsageError("parameter '" + key + "' must be a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t ParamSet::count(const std::string& key) const {
  return static_cast<std::size_t>(u64(key));
}

bool ParamSet::flag(const std::string& key) const {
  const std::string& v = text(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("parameter '" + key + "' must be a boolean, got '" + v + "'");
}

std::vector<double> ParamSet::reals(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_real(trim(item)));
    } catch (const UsageError&) {
      throw UsageError("parameter '" + key + "' must be a comma separated list of reals");
    }
  }
  return out;
}

void load_config(ParamSet& params, std::istream& is, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw UsageError(where + ": empty key");
    try {
      params.set(key, trim(t.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(where + ": " + e.what());
    }
  }
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

QVector Rng::vec(std::size_t n, double sd) {
  QVector v(n);
  for (auto& q : v) q = quat(sd);
  return v;
}

QMatrix Rng::mat(std::size_t rows, std::size_t cols, double sd) {
  QMatrix m(rows, cols);
  for (auto& q : m.data()) q = quat(sd);
  return m;
}

QMatrix Rng::hpd(std::size_t n, double shift) {
  const QMatrix x = mat(n, n);
  QMatrix p = x * hermitian(x);
  for (std::size_t d = 0; d < n; ++d) p(d, d) += Quaternion(shift);
  return symmetrize(p);
}

Eigen::MatrixXd Rng::spd(std::size_t n, double shift) {
  const auto sz = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(sz, sz);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal();
  return x * x.transpose() / static_cast<double>(n) + shift * Eigen::MatrixXd::Identity(sz, sz);
}

void write_csv_header(std::ostream& os, const std::string& scenario, std::uint64_t seed,
                      std::size_t steps, const ParamSet& params) {
  os << "# hrcalc " << kVersion << '\n'
     << "# scenario = " << scenario << '\n'
     << "# seed = " << seed << '\n'
     << "# steps = " << steps << '\n';
  for (const auto& [k, e] : params.entries()) os << "# " << k << " = " << e.value << '\n';
}

std::string quat_fields(const Quaternion& q) {
  return format_real(q.r) + ',' + format_real(q.i) + ',' + format_real(q.j) + ',' +
         format_real(q.k);
}

}  // namespace hrcalc::experiments
