#pragma once

#include <vector>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

struct SampleStats {
  QVector mean;     // E{q^a}, length 4M
  QMatrix aug_cov;  // E{(q^a - mean)(q^a - mean)^H}, 1/N normalisation
};

// Requires at least two samples of equal length.
SampleStats sample_stats(const std::vector<QVector>& samples);

// Empirical augmented characteristic function: the sample mean of
// exp(xi Re{s^H q}) = cos(t) + xi sin(t), t = Re{s^H q}. xi must be unit pure.
Quaternion aqcf_eval(const std::vector<QVector>& samples, const QVector& s,
                     const Quaternion& xi);

}  // namespace hrcalc
