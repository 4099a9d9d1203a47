#pragma once

#include <random>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc::testing {

class Rand {
 public:
  explicit Rand(unsigned long long seed) : gen_(seed) {}

  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Quaternion quat(double sd = 1.0) { return {normal(sd), normal(sd), normal(sd), normal(sd)}; }
  Quaternion pure_unit() {
    Quaternion q{0.0, normal(), normal(), normal()};
    return q / norm(q);
  }
  Quaternion unit() {
    const Quaternion q = quat();
    return q / norm(q);
  }
  QVector vec(std::size_t n, double sd = 1.0) {
    QVector v(n);
    for (auto& q : v) q = quat(sd);
    return v;
  }
  QMatrix mat(std::size_t r, std::size_t c, double sd = 1.0) {
    QMatrix m(r, c);
    for (auto& q : m.data()) q = quat(sd);
    return m;
  }
  // Hermitian positive definite: X X^H + shift I.
  QMatrix hpd(std::size_t n, double shift = 1.0) {
    const QMatrix x = mat(n, n);
    QMatrix p = x * hermitian(x);
    for (std::size_t d = 0; d < n; ++d) p(d, d) += Quaternion(shift);
    return symmetrize(p);
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hrcalc::testing
