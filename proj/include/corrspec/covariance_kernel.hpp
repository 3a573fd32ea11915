#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "corrspec/field_models.hpp"

namespace corrspec {

/// Covariance gamma_{k,l} = E(X_{0,0} X_{k,l}) on the square |k|, |l| <= radius,
/// zero outside. Always stores gamma_{k,l} = gamma_{-k,-l}.
class CovarianceFunction {
 public:
  explicit CovarianceFunction(int radius = 0);

  /// Builds from a lag -> value map. A lag given without its mirror gets the
  /// mirror filled in; conflicting mirrors throw InvalidCovarianceError.
  static CovarianceFunction from_lags(const std::map<Offset, double>& lags);

  int radius() const { return radius_; }
  /// Zero outside the radius.
  double at(int k, int l) const;
  double at(Offset lag) const { return at(lag.row, lag.col); }
  /// Sets gamma_{k,l} and gamma_{-k,-l}. Throws DimensionError outside the radius.
  void set(int k, int l, double value);

  /// (2R+1) x (2R+1) table indexed [k + R, l + R].
  const Eigen::MatrixXd& table() const { return table_; }
  std::map<Offset, double> nonzero_lags() const;

  double abs_sum() const;
  /// Checks gamma_{0,0} >= 0 and the stationarity mirror; throws InvalidCovarianceError.
  void validate() const;

 private:
  int radius_;
  Eigen::MatrixXd table_;
};

/// Samples of f(x, y) = sum gamma_{k,j} e^{-2 pi i (kx + jy)} on the uniform M x M
/// grid x_i = i / M. When gamma = V V^T with V even, `factor` holds f1(x_i) with
/// f(x, y) = f1(x) f1(y).
struct SpectralKernel {
  int grid_size = 0;
  Eigen::MatrixXd values;
  std::optional<Eigen::VectorXd> factor;

  bool separable() const { return factor.has_value(); }
  /// Max |f(x,y) - f(y,x)| over the grid.
  double exchange_asymmetry() const;
  static SpectralKernel constant(double value, int grid_size);
};

/// Rank-one factor gamma_{l,k} = V(l) V(k), V indexed k + radius.
struct SeparableFactor {
  int radius = 0;
  std::vector<double> values;
  bool even = false;

  double at(int k) const;
};

struct ConditionReport {
  double abs_sum = 0.0;
  bool symmetric_exchange = false;
  std::optional<SeparableFactor> separable;
};

CovarianceFunction gamma_from_linear(const LinearCoefficients& coeffs, double sigma2);
CovarianceFunction gamma_from_volterra(const VolterraCoefficients& coeffs, double sigma2);

/// Lag covariances of a centered patch, each divided by rows * cols (the biased,
/// positive-semidefinite normalization). Requires max_lag < min(rows, cols) / 2.
CovarianceFunction gamma_empirical(const FieldPatch& patch, int max_lag);

/// Requires grid_size >= 2 (2R + 1). Throws InvalidCovarianceError when f is
/// materially negative (below -1e-10 * max f); smaller negatives are clamped to 0.
SpectralKernel spectral_kernel(const CovarianceFunction& gamma, int grid_size);

/// Fourier coefficients of a kernel grid, gamma_{k,l} = M^-2 sum f(x_i, y_j) e^{2 pi i (k x_i + l y_j)},
/// for |k|, |l| <= radius. Inverse of spectral_kernel when grid_size >= 2 radius + 1.
CovarianceFunction covariance_from_kernel(const SpectralKernel& kernel, int radius);

ConditionReport check_conditions(const CovarianceFunction& gamma);

}  // namespace corrspec
