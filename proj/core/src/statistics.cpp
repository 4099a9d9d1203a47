#include "hrcalc/statistics.hpp"

#include <cmath>
#include <string>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"

namespace hrcalc {

SampleStats sample_stats(const std::vector<QVector>& samples) {
  if (samples.size() < 2) throw UsageError("sample_stats: at least two samples are required");
  const std::size_t m = samples.front().size();
  if (m == 0) throw UsageError("sample_stats: empty sample vectors");
  std::vector<QVector> aug;
  aug.reserve(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].size() != m)
      throw UsageError("sample_stats: sample " + std::to_string(n) + " has length " +
                       std::to_string(samples[n].size()) + ", expected " + std::to_string(m));
    aug.push_back(augment_stacked(samples[n]));
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  QVector mean(4 * m);
  for (const auto& a : aug)
    for (std::size_t r = 0; r < mean.size(); ++r) mean[r] += a[r];
  for (auto& q : mean) q *= inv_n;

  QMatrix cov(4 * m, 4 * m);
  for (const auto& a : aug) {
    const QVector d = a - mean;
    for (std::size_t r = 0; r < d.size(); ++r)
      for (std::size_t c = r; c < d.size(); ++c) cov(r, c) += d[r] * conj(d[c]);
  }
  for (std::size_t r = 0; r < cov.rows(); ++r)
    for (std::size_t c = r; c < cov.cols(); ++c) {
      cov(r, c) *= inv_n;
      if (c != r) cov(c, r) = conj(cov(r, c));
    }
  // Diagonal entries d d* are real; drop rounding residue.
  for (std::size_t r = 0; r < cov.rows(); ++r) cov(r, r) = cov(r, r).real_part();
  return {std::move(mean), std::move(cov)};
}

Quaternion aqcf_eval(const std::vector<QVector>& samples, const QVector& s,
                     const Quaternion& xi) {
  if (!is_pure(xi, 1e-12) || std::abs(norm(xi) - 1.0) > 1e-12)
    throw DomainError("aqcf_eval: xi must be a unit pure quaternion");
  if (samples.empty()) throw UsageError("aqcf_eval: no samples");
  double c = 0.0;
  double sn = 0.0;
  for (const auto& q : samples) {
    if (q.size() != s.size()) throw UsageError("aqcf_eval: sample length mismatch");
    double t = 0.0;
    for (std::size_t m = 0; m < q.size(); ++m) t += dot(s[m], q[m]);
    c += std::cos(t);
    sn += std::sin(t);
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  return Quaternion(c * inv_n) + xi.imag_part() * (sn * inv_n);
}

}  // namespace hrcalc
