#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "corrspec/ensembles.hpp"

namespace corrspec {

/// Sorted eigenvalues of one realization (or a pooled set of realizations).
struct EmpiricalSpectrum {
  std::vector<double> eigenvalues;

  int order() const { return static_cast<int>(eigenvalues.size()); }
  /// Sorts and checks finiteness.
  static EmpiricalSpectrum from_values(std::vector<double> values);
  /// The average of the members' step CDFs (equal-size members).
  static EmpiricalSpectrum pooled(std::span<const EmpiricalSpectrum> members);
};

/// CDF sampled on an increasing grid and linearly interpolated; 0 left of the
/// grid, 1 right of it.
struct SampledCdf {
  std::vector<double> x;
  std::vector<double> f;

  void validate() const;
};

class DistributionFunction {
 public:
  explicit DistributionFunction(EmpiricalSpectrum spectrum);
  explicit DistributionFunction(SampledCdf cdf);

  double operator()(double t) const;  // right-continuous value
  double left_limit(double t) const;
  /// Points where the function jumps or changes slope.
  const std::vector<double>& breakpoints() const;
  double support_width() const;

 private:
  std::variant<EmpiricalSpectrum, SampledCdf> repr_;
};

enum class DistanceKind { levy, kolmogorov };

/// Symmetric eigenvalues, sorted ascending. Throws NumericError on non-finite input
/// or when sum(lambda) misses the trace by more than 1e-9 n max|A|.
EmpiricalSpectrum eigenvalues(const Eigen::MatrixXd& matrix);
EmpiricalSpectrum eigenvalues(const SymmetricEnsemble& ensemble);
EmpiricalSpectrum eigenvalues(const GramEnsemble& ensemble);

/// (1/n) sum 1 / (lambda_i - z). Throws DomainError unless Im z > 0.
std::complex<double> stieltjes_of_spectrum(const EmpiricalSpectrum& spectrum, std::complex<double> z);

/// Levy distance by bisection (absolute tolerance 1e-6) or Kolmogorov sup-distance.
double distribution_distance(const DistributionFunction& f, const DistributionFunction& g, DistanceKind kind);

struct TraceComparison {
  double gap_squared = 0.0;  // |S_A(z) - S_B(z)|^2
  double bound = 0.0;        // Tr((A - B)^2) / (n |Im z|^4), A and B normalized
};

/// Throws DimensionError on order mismatch and BoundViolation if the gap exceeds
/// the bound by more than 1e-12.
TraceComparison trace_comparison_bound(const SymmetricEnsemble& a, const SymmetricEnsemble& b,
                                       std::complex<double> z);
TraceComparison trace_comparison_bound(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::complex<double> z);

/// Single-column CSV of eigenvalues.
void write_spectrum_csv(const std::filesystem::path& path, const EmpiricalSpectrum& spectrum);
/// Two-column CSV (x, F(x)).
void write_cdf_csv(const std::filesystem::path& path, const SampledCdf& cdf);

}  // namespace corrspec
