#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc::experiments {

// Declared key = value parameters of one scenario. Setting an undeclared key
// is a UsageError, so config typos surface as configuration errors.
class ParamSet {
 public:
  void declare(const std::string& key, const std::string& default_value, const std::string& help);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;  // comma separated

  struct Entry {
    std::string value, help;
  };
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  const Entry& entry(const std::string& key) const;
  std::map<std::string, Entry> entries_;
};

// Applies `key = value` lines; `#` starts a comment. Unknown keys and
// malformed lines are UsageErrors naming the line.
void load_config(ParamSet& params, std::istream& is, const std::string& source);

// Child seed for (master, index) via SplitMix64, so adding agents or runs
// does not perturb the streams of the others.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Quaternion quat(double sd = 1.0) { return {normal(sd), normal(sd), normal(sd), normal(sd)}; }
  Quaternion pure(double sd = 1.0) { return {0.0, normal(sd), normal(sd), normal(sd)}; }
  Quaternion unit() {
    const Quaternion q = quat();
    return q / norm(q);
  }
  Quaternion pure_unit() {
    const Quaternion q = pure();
    return q / norm(q);
  }
  QVector vec(std::size_t n, double sd = 1.0);
  QMatrix mat(std::size_t rows, std::size_t cols, double sd = 1.0);
  // X X^H + shift I, Hermitian positive definite.
  QMatrix hpd(std::size_t n, double shift = 1.0);
  // X X^T / n + shift I.
  Eigen::MatrixXd spd(std::size_t n, double shift);
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// `# hrcalc <version>`, `# scenario = ...`, `# seed = ...`, `# steps = ...`
// and one `# key = value` line per parameter.
void write_csv_header(std::ostream& os, const std::string& scenario, std::uint64_t seed,
                      std::size_t steps, const ParamSet& params);

// Comma-joined shortest round-trip components of q.
std::string quat_fields(const Quaternion& q);

}  // namespace hrcalc::experiments
