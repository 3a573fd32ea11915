#pragma once

// Monte Carlo experiments over replicated ensembles: universality against the
// Gaussian field with the same covariance, convergence of spectra to the solved
// limit, and tail frequencies of S(z) against the concentration bound
//   P(|S(z) - E S(z)| >= r) <= 4 exp(-n r^2 v^2 / (2560 K)),  v = Im z.
//
// Every replicate draws from its own seed derived from (base seed, size, replicate,
// role), and reductions run in replicate order, so results are independent of the
// number of worker threads.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "corrspec/ensembles.hpp"
#include "corrspec/limit_solver.hpp"
#include "corrspec/models.hpp"
#include "corrspec/spectral_empirics.hpp"

namespace corrspec {

enum class EnsembleKind { wigner, gram };

struct ExperimentConfig {
  FieldModel model = IidModel{};
  EnsembleKind ensemble = EnsembleKind::wigner;
  double aspect = 1.0;  // c = N / p for the Gram route
  WignerMode wigner_mode = WignerMode::lower_triangle;
  std::vector<int> sizes;  // n, or N for the Gram route
  int replicates = 10;
  std::uint64_t seed = 0;
  std::vector<std::complex<double>> z_points = {{0.0, 1.0}};
  SolverConfig solver;
  double eta = 1e-3;          // inversion line Im z = eta
  int energy_points = 1201;   // uniform grid for the inverted limit
  double levy_threshold = 0.05;
  int threads = 1;
  std::string config_hash;  // carried into every report

  /// Throws ConfigError.
  void validate() const;
  /// Columns of the data matrix: p = round(N / c) for Gram, n otherwise.
  int samples_for(int size) const;
};

/// Seed of one replicate; role 0 is the model, role 1 its Gaussian-matched twin.
std::uint64_t replicate_seed(std::uint64_t base, int size, int replicate, int role);

/// S(z) of one replicate, for every configured z.
std::vector<std::complex<double>> replicate_stieltjes(const ExperimentConfig& cfg, const FieldModel& model, int size,
                                                      std::uint64_t seed);

struct UniversalityPoint {
  std::complex<double> z;
  std::complex<double> mean_x;
  std::complex<double> mean_g;
  double gap = 0.0;           // |mean S_X - mean S_G|
  double standard_error = 0.0;
  std::vector<double> deviations;  // |S_X,r - mean S_G| per replicate
};

struct UniversalitySize {
  int size = 0;
  std::vector<UniversalityPoint> points;
};

struct UniversalityReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  int replicates = 0;
  std::vector<UniversalitySize> sizes;
  /// gap(n_{k+1}) <= gap(n_k) + 2 SE at every z and consecutive pair of sizes.
  bool gap_decreasing = true;
};

/// Compares the model with the Gaussian field of the same analytic covariance.
UniversalityReport run_universality(const ExperimentConfig& cfg);

struct DistanceAtSize {
  int size = 0;
  double levy = 0.0;
  double kolmogorov = 0.0;
  EmpiricalSpectrum pooled;  // all replicates' eigenvalues
};

struct LimitComparisonReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  int replicates = 0;
  Inversion limit;
  std::vector<DistanceAtSize> sizes;
  double levy_threshold = 0.0;
  bool passed = false;  // Levy distance at the largest size within the threshold
};

/// Solves the limit equation for the model's kernel and measures the distance of
/// the replicate-averaged spectral CDF to it. Throws ConditionError when the
/// symmetric route is asked for a covariance with gamma_{k,l} != gamma_{l,k}.
LimitComparisonReport run_limit_comparison(const ExperimentConfig& cfg);

/// Energy window holding the limiting spectrum of the configured route.
std::pair<double, double> limit_energy_window(const ExperimentConfig& cfg, const SpectralKernel& kernel);

struct TailPoint {
  double r = 0.0;
  double frequency = 0.0;  // fraction of replicates with |S - mean S| >= r
  double bound = 0.0;      // 4 exp(-n r^2 v^2 / (2560 K))
  double slack = 0.0;      // 99% binomial allowance above the bound
  bool within = true;
};

struct ConcentrationSize {
  int size = 0;
  std::complex<double> mean;
  double std_dev = 0.0;  // sample standard deviation of S(z)
  std::vector<TailPoint> tails;
};

struct ConcentrationReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  int replicates = 0;
  int dependence = 0;  // K used in the bound (at least 1)
  std::complex<double> z;
  std::vector<ConcentrationSize> sizes;
  double decay_exponent = 0.0;  // least-squares slope of log std against log n
  bool bound_respected = true;
};

/// Uses the first configured z. Throws ModelError when the model's dependence
/// range exceeds K.
ConcentrationReport run_concentration(const ExperimentConfig& cfg, int dependence, const std::vector<double>& radii);

double concentration_bound(int n, double r, double v, int dependence);
/// Smallest frequency that a Binomial(R, p) draw stays at or below with
/// probability 0.99, minus p.
double binomial_slack(int replicates, double p);
/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const UniversalityReport& report);
nlohmann::json to_json(const LimitComparisonReport& report);
nlohmann::json to_json(const ConcentrationReport& report);

/// Plot data. Each writes one CSV per figure kind into `dir` and returns the paths.
std::vector<std::filesystem::path> emit_plot_data(const LimitComparisonReport& report,
                                                  const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_plot_data(const UniversalityReport& report, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_plot_data(const ConcentrationReport& report, const std::filesystem::path& dir);

/// Freedman-Diaconis bin count with a floor of 32.
int histogram_bins(const std::vector<double>& sorted_values);

}  // namespace corrspec
