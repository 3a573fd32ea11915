#pragma once

// Self-consistent equations for the limiting Stieltjes transform of the
// symmetric and Gram ensembles, their inversion to densities, and closed-form
// reference transforms for constant kernels.
//
// Symmetric route:  h(x,z) = (-z - \int_0^1 f(x,y) h(y,z) dy)^{-1}
// Gram route:       h(x,z) = (-z + \int_0^1 f(x,s) / (1 + c \int_0^1 f(u,s) h(u,z) du) ds)^{-1}
// Both:             S(z)   = \int_0^1 h(x,z) dx
//
// Both are solved by damped fixed-point iteration on the periodic kernel grid,
// continued in Im z from the top of the configured eta path down to the target.

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "corrspec/covariance_kernel.hpp"
#include "corrspec/spectral_empirics.hpp"

namespace corrspec {

struct SolverConfig {
  int grid_size = 256;
  double damping = 0.5;
  double tolerance = 1e-9;
  int max_iterations = 10000;
  /// Strictly decreasing positive Im z values used for continuation.
  std::vector<double> eta_path = {2.0, 1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4};

  /// Throws ConfigError.
  void validate() const;
};

struct FixedPointSolution {
  std::complex<double> z;
  Eigen::VectorXcd h;
  std::complex<double> stieltjes;
  int iterations = 0;  // summed over continuation stages
  double residual = 0.0;
};

struct LimitSolution {
  std::vector<std::complex<double>> z;
  std::vector<Eigen::VectorXcd> h;
  std::vector<std::complex<double>> stieltjes;
  std::vector<int> iterations;
  std::vector<double> residuals;
};

enum class LimitRoute { wigner, gram };

/// One of the two limit equations bound to a kernel. Construction factors the
/// kernel once (low-rank SVD), so repeated solves at many z are cheap.
class LimitEquation {
 public:
  /// Symmetrizes the kernel, logging a warning when the asymmetry exceeds 1e-8.
  static LimitEquation wigner(const SpectralKernel& kernel, const SolverConfig& cfg);
  /// Throws DomainError unless aspect > 0.
  static LimitEquation gram(const SpectralKernel& kernel, double aspect, const SolverConfig& cfg);

  LimitRoute route() const { return route_; }
  int grid_size() const { return static_cast<int>(left_.rows()); }
  const SolverConfig& config() const { return cfg_; }

  /// The fixed-point map applied once.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& h, std::complex<double> z) const;
  /// Iterates at z from `initial` (default -1/z). Throws ConvergenceError or ClassError.
  FixedPointSolution solve_direct(std::complex<double> z, std::optional<Eigen::VectorXcd> initial = std::nullopt) const;
  /// Continues along the eta path (entries above Im z), then solves at z.
  FixedPointSolution solve(std::complex<double> z) const;
  /// Solves on the line E + i eta for every energy; `threads` workers, results in input order.
  LimitSolution solve_line(std::span<const double> energies, double eta, int threads = 1) const;

 private:
  LimitEquation(LimitRoute route, double aspect, Eigen::MatrixXd left, Eigen::MatrixXd right, SolverConfig cfg);
  void check_class(const Eigen::VectorXcd& h, std::complex<double> z) const;

  LimitRoute route_;
  double aspect_;
  // f / M = left * right^T
  Eigen::MatrixXd left_;
  Eigen::MatrixXd right_;
  SolverConfig cfg_;
};

FixedPointSolution solve_kp(const SpectralKernel& kernel, std::complex<double> z, const SolverConfig& cfg,
                            std::optional<Eigen::VectorXcd> warm_start = std::nullopt);
FixedPointSolution solve_gram_limit(const SpectralKernel& kernel, double aspect, std::complex<double> z,
                                    const SolverConfig& cfg, std::optional<Eigen::VectorXcd> warm_start = std::nullopt);

/// Distribution of the values of f1 under Lebesgue measure on [0,1], stored as
/// sorted atoms with weights.
struct SpectralMeasureOnLine {
  std::vector<double> atoms;
  std::vector<double> weights;

  /// Equal-weight atoms at the given samples of f1.
  static SpectralMeasureOnLine from_samples(std::vector<double> values);
  /// f1(x) = sum_k V(k) e^{2 pi i k x} sampled at `points` uniform x; V must be even.
  static SpectralMeasureOnLine from_factor(const SeparableFactor& factor, int points);
  static SpectralMeasureOnLine point_mass(double lambda);

  /// Lebesgue measure of {x : f1(x) < t}.
  double cdf(double t) const;
  double first_moment() const;
  void validate() const;
};

struct SeparableSolution {
  std::complex<double> z;
  std::complex<double> h;
  std::complex<double> stieltjes;
  int iterations = 0;
  double residual = 0.0;
};

/// Scalar route for gamma_{l,k} = V(l) V(k):
///   h = \int lambda dv / (-z - lambda h),  S = \int dv / (-z - lambda h).
SeparableSolution solve_separable(const SpectralMeasureOnLine& measure, std::complex<double> z,
                                  const SolverConfig& cfg);

struct Inversion {
  std::vector<double> energies;
  std::vector<double> density;
  SampledCdf cdf;
  double mass = 0.0;  // before renormalization
};

/// density(E) = Im S(E + i eta) / pi, CDF by cumulative trapezoid. Throws
/// SupportCoverageError if the mass falls outside [0.97, 1.03].
Inversion invert_stieltjes(const LimitSolution& solution, double eta);

enum class ReferenceLaw { semicircle, marchenko_pastur };

struct ReferenceParams {
  double variance = 1.0;
  double ratio = 1.0;  // c = N / p, Marchenko-Pastur only
};

/// Closed-form transforms on the Herglotz branch (Im > 0).
std::complex<double> reference_stieltjes(ReferenceLaw law, ReferenceParams params, std::complex<double> z);

/// Columns E, eta, Re S, Im S, density.
void write_solution_csv(const std::filesystem::path& path, const LimitSolution& solution);

}  // namespace corrspec
