#include "corrspec/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "corrspec/errors.hpp"
#include "corrspec/parallel.hpp"

namespace corrspec {

namespace {

using cplx = std::complex<double>;

constexpr double kRankTolerance = 1e-13;
constexpr double kAsymmetryWarning = 1e-8;
constexpr double kClassMargin = 1e-8;

void require_upper(cplx z) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("limit equations need Im z > 0");
  }
}

void require_kernel(const SpectralKernel& kernel) {
  const auto m = kernel.values.rows();
  if (m != kernel.values.cols() || m != kernel.grid_size || m < 1) {
    throw DimensionError("spectral kernel values must be grid_size x grid_size");
  }
  if (!kernel.values.allFinite()) throw InvalidCovarianceError("spectral kernel has non-finite samples");
  if (kernel.values.minCoeff() < 0.0) throw InvalidCovarianceError("spectral kernel must be nonnegative");
}

// Keeps the columns whose weight exceeds the relative rank tolerance.
void truncate_rank(const Eigen::VectorXd& weights, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v, double scale,
                   Eigen::MatrixXd& left, Eigen::MatrixXd& right) {
  const double largest = weights.size() ? weights.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (largest > 0.0 && std::abs(weights(i)) > kRankTolerance * largest) keep.push_back(i);
  }
  left.resize(u.rows(), static_cast<Eigen::Index>(keep.size()));
  right.resize(v.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    left.col(col) = u.col(keep[j]) * (weights(keep[j]) * scale);
    right.col(col) = v.col(keep[j]);
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_size < 8) throw ConfigError("solver grid size must be at least 8");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("solver damping must lie in (0, 1]");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ConfigError("solver tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("solver max_iterations must be positive");
  for (std::size_t i = 0; i < eta_path.size(); ++i) {
    if (!(eta_path[i] > 0.0) || !std::isfinite(eta_path[i])) throw ConfigError("eta path entries must be positive");
    if (i > 0 && !(eta_path[i] < eta_path[i - 1])) throw ConfigError("eta path must be strictly decreasing");
  }
}

LimitEquation::LimitEquation(LimitRoute route, double aspect, Eigen::MatrixXd left, Eigen::MatrixXd right,
                             SolverConfig cfg)
    : route_(route), aspect_(aspect), left_(std::move(left)), right_(std::move(right)), cfg_(std::move(cfg)) {}

LimitEquation LimitEquation::wigner(const SpectralKernel& kernel, const SolverConfig& cfg) {
  cfg.validate();
  require_kernel(kernel);
  const double asym = kernel.exchange_asymmetry();
  if (asym > kAsymmetryWarning) {
    spdlog::warn("spectral kernel is not exchange-symmetric (max |f - f^T| = {:.3e}); symmetrizing", asym);
  }
  const Eigen::MatrixXd f = 0.5 * (kernel.values + kernel.values.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
  if (eig.info() != Eigen::Success) throw NumericError("kernel eigendecomposition failed");
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  truncate_rank(eig.eigenvalues(), eig.eigenvectors(), eig.eigenvectors(), 1.0 / kernel.grid_size, left, right);
  return LimitEquation(LimitRoute::wigner, 0.0, std::move(left), std::move(right), cfg);
}

LimitEquation LimitEquation::gram(const SpectralKernel& kernel, double aspect, const SolverConfig& cfg) {
  cfg.validate();
  require_kernel(kernel);
  if (!(aspect > 0.0) || !std::isfinite(aspect)) throw DomainError("Gram aspect ratio c must be positive");
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(kernel.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() == Eigen::Success && svd.matrixU().allFinite() && svd.matrixV().allFinite()) {
    truncate_rank(svd.singularValues(), svd.matrixU(), svd.matrixV(), 1.0 / kernel.grid_size, left, right);
  } else {
    // BDCSVD can hand back NaN singular vectors for large rank-deficient kernels while reporting success.
    spdlog::debug("divide-and-conquer SVD of the kernel failed; retrying with Jacobi");
    Eigen::JacobiSVD<Eigen::MatrixXd> jacobi(kernel.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (jacobi.info() != Eigen::Success || !jacobi.matrixU().allFinite()) {
      throw NumericError("kernel singular value decomposition failed");
    }
    truncate_rank(jacobi.singularValues(), jacobi.matrixU(), jacobi.matrixV(), 1.0 / kernel.grid_size, left, right);
  }
  return LimitEquation(LimitRoute::gram, aspect, std::move(left), std::move(right), cfg);
}

Eigen::VectorXcd LimitEquation::apply(const Eigen::VectorXcd& h, cplx z) const {
  if (h.size() != left_.rows()) throw DimensionError("iterate size does not match the kernel grid");
  if (route_ == LimitRoute::wigner) {
    // (f h)(x) = \int f(x,y) h(y) dy
    const Eigen::VectorXcd fh = left_ * (right_.transpose() * h).eval();
    return (-z - fh.array()).inverse().matrix();
  }
  // g(s) = \int f(u,s) h(u) du, then w(x) = \int f(x,s) / (1 + c g(s)) ds.
  const Eigen::VectorXcd g = right_ * (left_.transpose() * h).eval();
  const Eigen::VectorXcd q = (1.0 + aspect_ * g.array()).inverse().matrix();
  const Eigen::VectorXcd w = left_ * (right_.transpose() * q).eval();
  return (-z + w.array()).inverse().matrix();
}

void LimitEquation::check_class(const Eigen::VectorXcd& h, cplx z) const {
  const double eta = z.imag();
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(eta * h(i).imag() > 0.0)) {
      throw ClassError("solution leaves the admissible class: Im z Im h <= 0 at grid point " + std::to_string(i));
    }
    if (eta * std::abs(h(i)) > 1.0 + kClassMargin) {
      throw ClassError("solution leaves the admissible class: Im z |h| > 1 at grid point " + std::to_string(i));
    }
  }
}

FixedPointSolution LimitEquation::solve_direct(cplx z, std::optional<Eigen::VectorXcd> initial) const {
  require_upper(z);
  const auto m = left_.rows();
  Eigen::VectorXcd h = initial ? std::move(*initial) : Eigen::VectorXcd::Constant(m, -1.0 / z);
  if (h.size() != m) throw DimensionError("warm start size does not match the kernel grid");
  const double alpha = cfg_.damping;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (true) {
    const Eigen::VectorXcd t = apply(h, z);
    if (!t.allFinite()) throw NumericError("fixed-point iterate became non-finite");
    residual = (t - h).cwiseAbs().maxCoeff();
    if (residual < cfg_.tolerance) {
      // Keep the undamped image and report its own residual.
      h = t;
      residual = (apply(h, z) - h).cwiseAbs().maxCoeff();
      break;
    }
    if (iterations >= cfg_.max_iterations) {
      throw ConvergenceError("fixed point did not converge at z = " + std::to_string(z.real()) + " + " +
                                 std::to_string(z.imag()) + "i (residual " + std::to_string(residual) + ")",
                             residual, iterations);
    }
    h = (1.0 - alpha) * h + alpha * t;
    ++iterations;
  }
  check_class(h, z);
  return FixedPointSolution{z, h, h.mean(), iterations, residual};
}

FixedPointSolution LimitEquation::solve(cplx z) const {
  require_upper(z);
  std::optional<Eigen::VectorXcd> warm;
  int total = 0;
  for (double eta : cfg_.eta_path) {
    if (!(eta > z.imag())) continue;
    FixedPointSolution stage = solve_direct(cplx(z.real(), eta), std::move(warm));
    total += stage.iterations;
    warm = std::move(stage.h);
  }
  FixedPointSolution out = solve_direct(z, std::move(warm));
  out.iterations += total;
  return out;
}

LimitSolution LimitEquation::solve_line(std::span<const double> energies, double eta, int threads) const {
  if (!(eta > 0.0)) throw DomainError("solve_line needs eta > 0");
  std::vector<FixedPointSolution> parts(energies.size());
  parallel_for(energies.size(), threads, [&](std::size_t i) { parts[i] = solve(cplx(energies[i], eta)); });
  LimitSolution out;
  for (auto& p : parts) {
    out.z.push_back(p.z);
    out.stieltjes.push_back(p.stieltjes);
    out.iterations.push_back(p.iterations);
    out.residuals.push_back(p.residual);
    out.h.push_back(std::move(p.h));
  }
  return out;
}

FixedPointSolution solve_kp(const SpectralKernel& kernel, cplx z, const SolverConfig& cfg,
                            std::optional<Eigen::VectorXcd> warm_start) {
  const LimitEquation eq = LimitEquation::wigner(kernel, cfg);
  return warm_start ? eq.solve_direct(z, std::move(warm_start)) : eq.solve(z);
}

FixedPointSolution solve_gram_limit(const SpectralKernel& kernel, double aspect, cplx z, const SolverConfig& cfg,
                                    std::optional<Eigen::VectorXcd> warm_start) {
  const LimitEquation eq = LimitEquation::gram(kernel, aspect, cfg);
  return warm_start ? eq.solve_direct(z, std::move(warm_start)) : eq.solve(z);
}

SpectralMeasureOnLine SpectralMeasureOnLine::from_samples(std::vector<double> values) {
  if (values.empty()) throw DimensionError("spectral measure needs at least one sample");
  std::sort(values.begin(), values.end());
  SpectralMeasureOnLine out;
  const double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    if (!out.atoms.empty() && out.atoms.back() == v) {
      out.weights.back() += w;
    } else {
      out.atoms.push_back(v);
      out.weights.push_back(w);
    }
  }
  out.validate();
  return out;
}

SpectralMeasureOnLine SpectralMeasureOnLine::from_factor(const SeparableFactor& factor, int points) {
  if (points < 1) throw DimensionError("spectral measure needs a positive number of points");
  if (!factor.even) throw DomainError("separable route needs an even factor V");
  std::vector<double> values(static_cast<std::size_t>(points));
  double largest = 0.0;
  for (int i = 0; i < points; ++i) {
    double s = factor.at(0);
    for (int k = 1; k <= factor.radius; ++k) {
      s += 2.0 * factor.at(k) * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * i / points);
    }
    values[static_cast<std::size_t>(i)] = s;
    largest = std::max(largest, std::abs(s));
  }
  for (double& v : values) {
    if (v < -1e-10 * largest) throw InvalidCovarianceError("f1 changes sign: the product kernel is not a covariance");
    v = std::max(v, 0.0);
  }
  return from_samples(std::move(values));
}

SpectralMeasureOnLine SpectralMeasureOnLine::point_mass(double lambda) {
  SpectralMeasureOnLine out{{lambda}, {1.0}};
  out.validate();
  return out;
}

double SpectralMeasureOnLine::cdf(double t) const {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size() && atoms[i] < t; ++i) total += weights[i];
  return total;
}

double SpectralMeasureOnLine::first_moment() const {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) total += atoms[i] * weights[i];
  return total;
}

void SpectralMeasureOnLine::validate() const {
  if (atoms.empty() || atoms.size() != weights.size()) throw DimensionError("spectral measure atoms/weights mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i] >= 0.0) || !std::isfinite(atoms[i])) throw DomainError("spectral measure lives on [0, inf)");
    if (i > 0 && !(atoms[i] > atoms[i - 1])) throw DomainError("spectral measure atoms must be increasing");
    if (!(weights[i] >= 0.0)) throw DomainError("spectral measure weights must be nonnegative");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("spectral measure must have total mass 1");
}

SeparableSolution solve_separable(const SpectralMeasureOnLine& measure, cplx z, const SolverConfig& cfg) {
  cfg.validate();
  measure.validate();
  require_upper(z);
  const double moment = measure.first_moment();

  auto map = [&](cplx h, cplx w) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < measure.atoms.size(); ++i) {
      s += measure.weights[i] * measure.atoms[i] / (-w - measure.atoms[i] * h);
    }
    return s;
  };
  auto stage = [&](cplx w, cplx h, int& iterations) {
    double residual = std::numeric_limits<double>::infinity();
    int local = 0;
    while (true) {
      const cplx t = map(h, w);
      residual = std::abs(t - h);
      if (residual < cfg.tolerance) {
        h = t;
        residual = std::abs(map(h, w) - h);
        break;
      }
      if (local >= cfg.max_iterations) {
        throw ConvergenceError("separable fixed point did not converge (residual " + std::to_string(residual) + ")",
                               residual, iterations + local);
      }
      h = (1.0 - cfg.damping) * h + cfg.damping * t;
      ++local;
    }
    iterations += local;
    if (moment > 0.0 && !(w.imag() * h.imag() > 0.0)) {
      throw ClassError("separable solution leaves the admissible class: Im z Im h <= 0");
    }
    return std::pair{h, residual};
  };

  int iterations = 0;
  std::optional<cplx> h;
  for (double eta : cfg.eta_path) {
    if (!(eta > z.imag())) continue;
    const cplx w(z.real(), eta);
    h = stage(w, h.value_or(-moment / w), iterations).first;
  }
  const auto [hz, residual] = stage(z, h.value_or(-moment / z), iterations);

  cplx s = 0.0;
  for (std::size_t i = 0; i < measure.atoms.size(); ++i) s += measure.weights[i] / (-z - measure.atoms[i] * hz);
  return SeparableSolution{z, hz, s, iterations, residual};
}

Inversion invert_stieltjes(const LimitSolution& solution, double eta) {
  const std::size_t n = solution.z.size();
  if (n < 2 || solution.stieltjes.size() != n) throw DimensionError("inversion needs at least two solved points");
  if (!(eta > 0.0)) throw DomainError("inversion needs eta > 0");
  Inversion out;
  out.energies.resize(n);
  out.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(solution.z[i].imag() - eta) > 1e-12 * std::max(1.0, eta)) {
      throw DomainError("solution z-grid does not lie on Im z = eta");
    }
    out.energies[i] = solution.z[i].real();
    if (i > 0 && !(out.energies[i] > out.energies[i - 1])) throw DomainError("energy grid must be increasing");
    out.density[i] = solution.stieltjes[i].imag() / std::numbers::pi;
  }
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    cumulative[i] =
        cumulative[i - 1] + 0.5 * (out.density[i] + out.density[i - 1]) * (out.energies[i] - out.energies[i - 1]);
  }
  out.mass = cumulative.back();
  if (!(out.mass >= 0.97 && out.mass <= 1.03)) {
    throw SupportCoverageError("density mass " + std::to_string(out.mass) + " outside [0.97, 1.03]: widen the energy grid",
                               out.mass);
  }
  for (double& c : cumulative) c /= out.mass;
  out.cdf = SampledCdf{out.energies, std::move(cumulative)};
  return out;
}

std::complex<double> reference_stieltjes(ReferenceLaw law, ReferenceParams params, cplx z) {
  require_upper(z);
  if (!(params.variance > 0.0)) throw DomainError("reference law needs variance > 0");
  cplx s;
  if (law == ReferenceLaw::semicircle) {
    // s = (-z + sqrt(z^2 - 4 sigma^2)) / (2 sigma^2), written as a product of principal roots.
    const double r = 2.0 * std::sqrt(params.variance);
    s = (-z + std::sqrt(z - r) * std::sqrt(z + r)) / (2.0 * params.variance);
  } else {
    if (!(params.ratio > 0.0)) throw DomainError("Marchenko-Pastur law needs ratio c > 0");
    const double c = params.ratio;
    const cplx w = z / params.variance;
    const double a = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
    const double b = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
    const cplx m = ((1.0 - c) - w + std::sqrt(w - a) * std::sqrt(w - b)) / (2.0 * c * w);
    s = m / params.variance;
  }
  if (!(s.imag() > 0.0)) throw NumericError("reference transform landed on the wrong branch");
  return s;
}

void write_solution_csv(const std::filesystem::path& path, const LimitSolution& solution) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "E,eta,ReS,ImS,density\n";
  for (std::size_t i = 0; i < solution.z.size(); ++i) {
    const cplx s = solution.stieltjes[i];
    out << solution.z[i].real() << ',' << solution.z[i].imag() << ',' << s.real() << ',' << s.imag() << ','
        << s.imag() / std::numbers::pi << '\n';
  }
}

}  // namespace corrspec
