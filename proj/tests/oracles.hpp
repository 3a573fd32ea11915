#pragma once

// Reference computations used by the tests. Each avoids the code path it checks:
// exact integer rank instead of eigenvalue counting, direct trigonometric sums
// instead of FFTs, quadratic roots instead of fixed points, Jacobi rotations
// instead of the library eigensolver, grid search instead of bisection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "corrspec/field_models.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Rank over Q by fraction-free (Bareiss) elimination with big integers.
inline int bareiss_rank(const std::vector<std::vector<long long>>& rows_in) {
  using boost::multiprecision::cpp_int;
  std::vector<std::vector<cpp_int>> a;
  for (const auto& r : rows_in) a.emplace_back(r.begin(), r.end());
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  cpp_int prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
      }
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return static_cast<int>(rank);
}

/// f(x, y) = sum gamma_{k,l} cos(2 pi (k x + l y)) for a lag-symmetric gamma.
inline double kernel_value(const std::map<corrspec::Offset, double>& gamma, double x, double y) {
  double s = 0.0;
  for (const auto& [lag, g] : gamma) s += g * std::cos(2.0 * std::numbers::pi * (lag.row * x + lag.col * y));
  return s;
}

/// (1/M^2) sum_{i,j} f(x_i, y_j) e^{2 pi i (k x_i + l y_j)} by direct summation.
inline double fourier_coefficient(const Eigen::MatrixXd& f, int k, int l) {
  const auto m = f.rows();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double angle = 2.0 * std::numbers::pi * (static_cast<double>(k) * i + static_cast<double>(l) * j) / m;
      s += f(i, j) * std::polar(1.0, angle);
    }
  }
  return s.real() / static_cast<double>(m * m);
}

/// Root with positive imaginary part of a s^2 + b s + 1 = 0 (a != 0).
inline cplx herglotz_root(cplx a, cplx b) {
  const cplx d = std::sqrt(b * b - 4.0 * a);
  const cplx r1 = (-b + d) / (2.0 * a);
  const cplx r2 = (-b - d) / (2.0 * a);
  return r1.imag() > r2.imag() ? r1 : r2;
}

/// Semicircle with variance sigma2: sigma2 s^2 + z s + 1 = 0.
inline cplx semicircle(cplx z, double sigma2) { return herglotz_root(sigma2, z); }

/// Marchenko-Pastur with ratio c and variance sigma2: c w m^2 + (w + c - 1) m + 1 = 0 at w = z / sigma2,
/// scaled by 1 / sigma2.
inline cplx marchenko_pastur(cplx z, double c, double sigma2) {
  const cplx w = z / sigma2;
  return herglotz_root(c * w, w + c - 1.0) / sigma2;
}

inline double semicircle_density(double e, double sigma2) {
  const double r2 = 4.0 * sigma2 - e * e;
  return r2 > 0.0 ? std::sqrt(r2) / (2.0 * std::numbers::pi * sigma2) : 0.0;
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(out.begin(), out.end());
  return out;
}

inline cplx stieltjes(const std::vector<double>& eigenvalues, cplx z) {
  cplx s = 0.0;
  for (double l : eigenvalues) s += 1.0 / (l - z);
  return s / static_cast<double>(eigenvalues.size());
}

/// Levy distance by scanning eps on a grid of step `step`, testing the sandwich
/// inequality on a dense x grid over [lo, hi].
inline double levy_grid_search(const std::function<double(double)>& f, const std::function<double(double)>& g,
                               double lo, double hi, double step) {
  // Brute force on an x grid finer than the requested eps resolution; feasibility is monotone in eps.
  const int xs = static_cast<int>(std::ceil(5.0 * (hi - lo) / step));
  auto feasible = [&](double eps) {
    for (int i = 0; i <= xs; ++i) {
      const double x = lo + (hi - lo) * i / xs;
      if (g(x) > f(x + eps) + eps + 1e-12) return false;
      if (f(x - eps) - eps > g(x) + 1e-12) return false;
    }
    return true;
  };
  if (feasible(0.0)) return 0.0;
  double a = 0.0;
  double b = 1.0 + (hi - lo);
  while (b - a > 0.1 * step) {
    const double mid = 0.5 * (a + b);
    (feasible(mid) ? b : a) = mid;
  }
  return b;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Sample lag covariance (1/count) sum X_{i,j} X_{i+k,j+l} over the positions where both lie in the patch.
inline double lag_covariance(const Eigen::MatrixXd& x, int k, int l) {
  double s = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Eigen::Index i2 = i + k;
      const Eigen::Index j2 = j + l;
      if (i2 < 0 || j2 < 0 || i2 >= x.rows() || j2 >= x.cols()) continue;
      s += x(i, j) * x(i2, j2);
      ++count;
    }
  }
  return s / static_cast<double>(count);
}

}  // namespace oracle
