#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace stats {

/// Mean of X_{i,j} X_{i+k,j+l} over a patch with a batch-means standard error
/// (16 horizontal bands), which absorbs short-range dependence between products.
struct LagEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline LagEstimate lag_product(const Eigen::MatrixXd& x, int k, int l) {
  const int bands = 16;
  std::vector<double> sums(bands, 0.0);
  std::vector<long> counts(bands, 0);
  double total = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto band = static_cast<std::size_t>(i * bands / x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Eigen::Index i2 = i + k;
      const Eigen::Index j2 = j + l;
      if (i2 < 0 || j2 < 0 || i2 >= x.rows() || j2 >= x.cols()) continue;
      const double p = x(i, j) * x(i2, j2);
      sums[band] += p;
      ++counts[band];
      total += p;
      ++count;
    }
  }
  LagEstimate out;
  out.mean = total / static_cast<double>(count);
  double ss = 0.0;
  for (int b = 0; b < bands; ++b) {
    const double d = sums[static_cast<std::size_t>(b)] / static_cast<double>(counts[static_cast<std::size_t>(b)]) -
                     out.mean;
    ss += d * d;
  }
  out.se = std::sqrt(ss / (bands - 1) / bands);
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double std_dev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace stats
