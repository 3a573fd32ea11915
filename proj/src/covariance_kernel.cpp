#include "corrspec/covariance_kernel.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "corrspec/errors.hpp"
#include "fft.hpp"

namespace corrspec {

namespace {

constexpr double kExchangeTolerance = 1e-12;
constexpr double kSeparableTolerance = 1e-8;
constexpr double kNegativityTolerance = 1e-10;

std::string lag_name(int k, int l) { return "(" + std::to_string(k) + "," + std::to_string(l) + ")"; }

}  // namespace

CovarianceFunction::CovarianceFunction(int radius)
    : radius_(radius), table_(Eigen::MatrixXd::Zero(2 * radius + 1, 2 * radius + 1)) {
  if (radius < 0) throw DimensionError("covariance radius must be nonnegative");
}

CovarianceFunction CovarianceFunction::from_lags(const std::map<Offset, double>& lags) {
  int radius = 0;
  for (const auto& [lag, v] : lags) radius = std::max({radius, std::abs(lag.row), std::abs(lag.col)});
  CovarianceFunction out(radius);
  for (const auto& [lag, v] : lags) {
    if (!std::isfinite(v)) throw InvalidCovarianceError("non-finite covariance at lag " + lag_name(lag.row, lag.col));
    auto mirror = lags.find(-lag);
    if (mirror != lags.end() && std::abs(mirror->second - v) > kExchangeTolerance * std::max(1.0, std::abs(v))) {
      throw InvalidCovarianceError("covariance is not symmetric under lag negation at " +
                                   lag_name(lag.row, lag.col));
    }
    out.set(lag.row, lag.col, v);
  }
  out.validate();
  return out;
}

double CovarianceFunction::at(int k, int l) const {
  if (std::abs(k) > radius_ || std::abs(l) > radius_) return 0.0;
  return table_(k + radius_, l + radius_);
}

void CovarianceFunction::set(int k, int l, double value) {
  if (std::abs(k) > radius_ || std::abs(l) > radius_) {
    throw DimensionError("lag " + lag_name(k, l) + " outside covariance radius " + std::to_string(radius_));
  }
  table_(k + radius_, l + radius_) = value;
  table_(-k + radius_, -l + radius_) = value;
}

std::map<Offset, double> CovarianceFunction::nonzero_lags() const {
  std::map<Offset, double> out;
  for (int k = -radius_; k <= radius_; ++k) {
    for (int l = -radius_; l <= radius_; ++l) {
      if (at(k, l) != 0.0) out.emplace(Offset{k, l}, at(k, l));
    }
  }
  return out;
}

double CovarianceFunction::abs_sum() const { return table_.cwiseAbs().sum(); }

void CovarianceFunction::validate() const {
  if (!table_.allFinite()) throw InvalidCovarianceError("covariance has non-finite values");
  if (at(0, 0) < 0.0) throw InvalidCovarianceError("covariance has negative variance gamma_{0,0}");
  for (int k = -radius_; k <= radius_; ++k) {
    for (int l = -radius_; l <= radius_; ++l) {
      if (at(k, l) != at(-k, -l)) {
        throw InvalidCovarianceError("covariance is not symmetric under lag negation at " + lag_name(k, l));
      }
    }
  }
}

double SpectralKernel::exchange_asymmetry() const { return (values - values.transpose()).cwiseAbs().maxCoeff(); }

SpectralKernel SpectralKernel::constant(double value, int grid_size) {
  SpectralKernel k;
  k.grid_size = grid_size;
  k.values = Eigen::MatrixXd::Constant(grid_size, grid_size, value);
  if (value >= 0.0) k.factor = Eigen::VectorXd::Constant(grid_size, std::sqrt(value));
  return k;
}

double SeparableFactor::at(int k) const {
  if (std::abs(k) > radius) return 0.0;
  return values[static_cast<std::size_t>(k + radius)];
}

CovarianceFunction gamma_from_linear(const LinearCoefficients& coeffs, double sigma2) {
  const BoundingBox box = coeffs.bounds();
  CovarianceFunction out(box.diameter());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(out.table().rows(), out.table().cols());
  const int r = out.radius();
  // gamma_k = sigma^2 sum_u a_u a_{u+k}: every ordered pair (u, w) contributes to lag w - u.
  for (const auto& [u, au] : coeffs.values) {
    for (const auto& [w, aw] : coeffs.values) {
      const Offset lag = w - u;
      acc(lag.row + r, lag.col + r) += au * aw;
    }
  }
  for (int k = -r; k <= r; ++k) {
    for (int l = -r; l <= r; ++l) {
      // Average with the mirror so the stored table is exactly symmetric.
      out.set(k, l, sigma2 * 0.5 * (acc(k + r, l + r) + acc(-k + r, -l + r)));
    }
  }
  return out;
}

CovarianceFunction gamma_from_volterra(const VolterraCoefficients& coeffs, double sigma2) {
  coeffs.validate();
  std::map<Offset, double> acc;
  for (const auto& [u, au] : coeffs.linear) {
    for (const auto& [w, aw] : coeffs.linear) acc[w - u] += sigma2 * au * aw;
  }
  // sigma^4 sum_{u,v} b_{u,v} (b_{u+k,v+k} + b_{v+k,u+k}).
  const double sigma4 = sigma2 * sigma2;
  for (const auto& [uv, b] : coeffs.quadratic) {
    for (const auto& [uv2, b2] : coeffs.quadratic) {
      const auto& [u, v] = uv;
      const auto& [u2, v2] = uv2;
      if (u2 - u == v2 - v) acc[u2 - u] += sigma4 * b * b2;
      if (u2 - v == v2 - u) acc[u2 - v] += sigma4 * b * b2;
    }
  }
  int radius = 0;
  for (const auto& [lag, v] : acc) radius = std::max({radius, std::abs(lag.row), std::abs(lag.col)});
  CovarianceFunction out(radius);
  for (const auto& [lag, v] : acc) {
    const auto mirror = acc.find(-lag);
    const double m = mirror == acc.end() ? 0.0 : mirror->second;
    out.set(lag.row, lag.col, 0.5 * (v + m));
  }
  return out;
}

CovarianceFunction gamma_empirical(const FieldPatch& patch, int max_lag) {
  const int rows = patch.rows();
  const int cols = patch.cols();
  if (max_lag < 0 || 2 * max_lag >= std::min(rows, cols)) {
    throw DimensionError("max_lag " + std::to_string(max_lag) + " must be below min(rows, cols) / 2 for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " patch");
  }
  const double count = static_cast<double>(rows) * static_cast<double>(cols);
  CovarianceFunction out(max_lag);
  const auto& x = patch.values;
  for (int k = 0; k <= max_lag; ++k) {
    for (int l = -max_lag; l <= max_lag; ++l) {
      if (k == 0 && l < 0) continue;  // filled by the mirror
      const int c0 = std::max(0, -l);
      const int c1 = std::min(cols, cols - l);
      const double s =
          (x.block(0, c0, rows - k, c1 - c0).array() * x.block(k, c0 + l, rows - k, c1 - c0).array()).sum();
      out.set(k, l, s / count);
    }
  }
  return out;
}

SpectralKernel spectral_kernel(const CovarianceFunction& gamma, int grid_size) {
  gamma.validate();
  const int r = gamma.radius();
  if (grid_size < 2 * (2 * r + 1)) {
    throw DimensionError("kernel grid size " + std::to_string(grid_size) + " below 2 (2R + 1) = " +
                         std::to_string(2 * (2 * r + 1)));
  }
  const int width = 2 * r + 1;
  // f = E Gamma E^T with E(i, k) = e^{-2 pi i k x_i}.
  Eigen::MatrixXcd e(grid_size, width);
  for (int i = 0; i < grid_size; ++i) {
    for (int k = -r; k <= r; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) * i / grid_size;
      e(i, k + r) = std::polar(1.0, angle);
    }
  }
  const Eigen::MatrixXcd f = e * gamma.table().cast<std::complex<double>>() * e.transpose();

  const double abs_sum = gamma.abs_sum();
  const double max_imag = f.imag().cwiseAbs().maxCoeff();
  if (max_imag > 1e-12 * std::max(abs_sum, 1.0) * width) {
    throw InvalidCovarianceError("spectral kernel has an imaginary part " + std::to_string(max_imag));
  }

  SpectralKernel kernel;
  kernel.grid_size = grid_size;
  kernel.values = f.real();
  const double max_f = kernel.values.maxCoeff();
  const double min_f = kernel.values.minCoeff();
  if (min_f < -kNegativityTolerance * std::max(max_f, 0.0)) {
    throw InvalidCovarianceError("spectral kernel is negative (min " + std::to_string(min_f) +
                                 "): not a covariance function");
  }
  kernel.values = kernel.values.cwiseMax(0.0);

  const ConditionReport report = check_conditions(gamma);
  if (report.separable && report.separable->even) {
    const SeparableFactor& v = *report.separable;
    Eigen::VectorXd f1(grid_size);
    for (int i = 0; i < grid_size; ++i) {
      double s = v.at(0);
      for (int k = 1; k <= v.radius; ++k) {
        s += 2.0 * v.at(k) * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * i / grid_size);
      }
      f1(i) = s;
    }
    kernel.factor = f1;
  }
  return kernel;
}

CovarianceFunction covariance_from_kernel(const SpectralKernel& kernel, int radius) {
  const int m = kernel.grid_size;
  if (2 * radius + 1 > m) throw DimensionError("requested radius exceeds the kernel's Nyquist range");
  detail::Fft2d fft(m, m, FFTW_BACKWARD);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) fft.at(i, j) = kernel.values(i, j);
  }
  fft.execute();
  const double norm = 1.0 / (static_cast<double>(m) * m);
  CovarianceFunction out(radius);
  for (int k = -radius; k <= radius; ++k) {
    for (int l = -radius; l <= radius; ++l) {
      const double v = fft.at((k + m) % m, (l + m) % m).real() * norm;
      const double w = fft.at((-k + m) % m, (-l + m) % m).real() * norm;
      out.set(k, l, 0.5 * (v + w));
    }
  }
  return out;
}

ConditionReport check_conditions(const CovarianceFunction& gamma) {
  ConditionReport report;
  report.abs_sum = gamma.abs_sum();
  const int r = gamma.radius();
  const Eigen::MatrixXd& g = gamma.table();

  report.symmetric_exchange = (g - g.transpose()).cwiseAbs().maxCoeff() <= kExchangeTolerance;
  if (!report.symmetric_exchange) return report;

  // Rank-one test gamma = V V^T through the largest diagonal entry.
  Eigen::Index pivot = 0;
  const double pivot_value = g.diagonal().maxCoeff(&pivot);
  const double scale = g.cwiseAbs().maxCoeff();
  SeparableFactor v;
  v.radius = r;
  v.values.assign(static_cast<std::size_t>(2 * r + 1), 0.0);
  if (scale == 0.0) {
    v.even = true;
    report.separable = v;
    return report;
  }
  if (pivot_value <= 0.0) return report;
  Eigen::VectorXd col = g.col(pivot) / std::sqrt(pivot_value);
  if ((g - col * col.transpose()).cwiseAbs().maxCoeff() > kSeparableTolerance * scale) return report;

  // Sign chosen so that f1(0) = sum V >= 0.
  double total = col.sum();
  if (total == 0.0) {
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    total = col(big);
  }
  if (total < 0.0) col = -col;
  for (int k = 0; k < 2 * r + 1; ++k) v.values[static_cast<std::size_t>(k)] = col(k);
  const double vmax = col.cwiseAbs().maxCoeff();
  v.even = true;
  for (int k = 1; k <= r; ++k) {
    if (std::abs(v.at(k) - v.at(-k)) > kSeparableTolerance * vmax) v.even = false;
  }
  report.separable = v;
  return report;
}

}  // namespace corrspec
