#include "corrspec/spectral_empirics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "corrspec/errors.hpp"

namespace corrspec {

namespace {

constexpr double kLevyTolerance = 1e-6;

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace

EmpiricalSpectrum EmpiricalSpectrum::from_values(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("spectrum has a non-finite eigenvalue");
  }
  std::sort(values.begin(), values.end());
  return EmpiricalSpectrum{std::move(values)};
}

EmpiricalSpectrum EmpiricalSpectrum::pooled(std::span<const EmpiricalSpectrum> members) {
  std::vector<double> all;
  for (const auto& m : members) all.insert(all.end(), m.eigenvalues.begin(), m.eigenvalues.end());
  return from_values(std::move(all));
}

void SampledCdf::validate() const {
  if (x.size() != f.size() || x.size() < 2) throw DimensionError("sampled CDF needs matching grids of size >= 2");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(f[i])) throw NumericError("sampled CDF has non-finite values");
    if (i > 0 && !(x[i] > x[i - 1])) throw DimensionError("sampled CDF grid must be strictly increasing");
    if (i > 0 && f[i] < f[i - 1]) throw NumericError("sampled CDF must be nondecreasing");
  }
  if (f.front() < 0.0 || f.back() > 1.0 + 1e-12) throw NumericError("sampled CDF must stay within [0, 1]");
}

DistributionFunction::DistributionFunction(EmpiricalSpectrum spectrum) : repr_(std::move(spectrum)) {
  if (std::get<EmpiricalSpectrum>(repr_).eigenvalues.empty()) throw DimensionError("empty spectrum");
}

DistributionFunction::DistributionFunction(SampledCdf cdf) : repr_(std::move(cdf)) {
  std::get<SampledCdf>(repr_).validate();
}

double DistributionFunction::operator()(double t) const {
  if (const auto* s = std::get_if<EmpiricalSpectrum>(&repr_)) {
    const auto& e = s->eigenvalues;
    return static_cast<double>(std::upper_bound(e.begin(), e.end(), t) - e.begin()) / e.size();
  }
  const auto& c = std::get<SampledCdf>(repr_);
  if (t < c.x.front()) return 0.0;
  if (t >= c.x.back()) return 1.0;
  const auto it = std::upper_bound(c.x.begin(), c.x.end(), t);
  const auto i = static_cast<std::size_t>(it - c.x.begin());
  const double w = (t - c.x[i - 1]) / (c.x[i] - c.x[i - 1]);
  return c.f[i - 1] + w * (c.f[i] - c.f[i - 1]);
}

double DistributionFunction::left_limit(double t) const {
  if (const auto* s = std::get_if<EmpiricalSpectrum>(&repr_)) {
    const auto& e = s->eigenvalues;
    return static_cast<double>(std::lower_bound(e.begin(), e.end(), t) - e.begin()) / e.size();
  }
  const auto& c = std::get<SampledCdf>(repr_);
  if (t <= c.x.front()) return 0.0;
  if (t > c.x.back()) return 1.0;
  if (t == c.x.back()) return c.f.back();
  return (*this)(t);
}

const std::vector<double>& DistributionFunction::breakpoints() const {
  if (const auto* s = std::get_if<EmpiricalSpectrum>(&repr_)) return s->eigenvalues;
  return std::get<SampledCdf>(repr_).x;
}

double DistributionFunction::support_width() const {
  const auto& b = breakpoints();
  return b.back() - b.front();
}

EmpiricalSpectrum eigenvalues(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("eigenvalues need a square matrix");
  if (!matrix.allFinite()) throw NumericError("matrix has non-finite entries");
  const Eigen::Index n = matrix.rows();
  if (n == 0) return EmpiricalSpectrum{};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (std::abs(values.sum() - matrix.trace()) > 1e-9 * static_cast<double>(n) * scale) {
    throw NumericError("eigenvalue sum does not reproduce the trace");
  }
  return EmpiricalSpectrum::from_values(std::vector<double>(values.begin(), values.end()));
}

EmpiricalSpectrum eigenvalues(const SymmetricEnsemble& ensemble) { return eigenvalues(ensemble.entries); }

EmpiricalSpectrum eigenvalues(const GramEnsemble& ensemble) { return eigenvalues(ensemble.matrix); }

std::complex<double> stieltjes_of_spectrum(const EmpiricalSpectrum& spectrum, std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw DomainError("Stieltjes transform needs Im z > 0");
  if (spectrum.eigenvalues.empty()) throw DimensionError("empty spectrum");
  std::complex<double> sum = 0.0;
  for (double lambda : spectrum.eigenvalues) sum += 1.0 / (lambda - z);
  return sum / static_cast<double>(spectrum.eigenvalues.size());
}

namespace {

// sup_x [G(x) - F(x + shift)] over the candidate points where either side changes.
double sup_excess(const DistributionFunction& g, const DistributionFunction& f, double shift) {
  double best = -std::numeric_limits<double>::infinity();
  auto probe = [&](double x) {
    best = std::max(best, g(x) - f(x + shift));
    best = std::max(best, g.left_limit(x) - f.left_limit(x + shift));
  };
  for (double x : g.breakpoints()) probe(x);
  for (double x : f.breakpoints()) probe(x - shift);
  return best;
}

bool levy_feasible(const DistributionFunction& f, const DistributionFunction& g, double eps) {
  constexpr double slack = 1e-12;
  // G(x) <= F(x + eps) + eps and F(x - eps) - eps <= G(x), the latter read as F(y) <= G(y + eps) + eps.
  return sup_excess(g, f, eps) <= eps + slack && sup_excess(f, g, eps) <= eps + slack;
}

}  // namespace

double distribution_distance(const DistributionFunction& f, const DistributionFunction& g, DistanceKind kind) {
  if (kind == DistanceKind::kolmogorov) {
    double best = 0.0;
    auto probe = [&](double x) {
      best = std::max(best, std::abs(f(x) - g(x)));
      best = std::max(best, std::abs(f.left_limit(x) - g.left_limit(x)));
    };
    for (double x : f.breakpoints()) probe(x);
    for (double x : g.breakpoints()) probe(x);
    return best;
  }

  if (levy_feasible(f, g, 0.0)) return 0.0;
  const double lo_x = std::min(f.breakpoints().front(), g.breakpoints().front());
  const double hi_x = std::max(f.breakpoints().back(), g.breakpoints().back());
  double lo = 0.0;
  double hi = 1.0 + (hi_x - lo_x);
  while (hi - lo > kLevyTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (levy_feasible(f, g, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

TraceComparison trace_comparison_bound(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::complex<double> z) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("trace comparison needs matrices of the same order");
  }
  if (z.imag() == 0.0) throw DomainError("trace comparison needs Im z != 0");
  // Both transforms are taken in the upper half-plane; S(conj z) = conj S(z) leaves the gap unchanged.
  const std::complex<double> w = z.imag() > 0.0 ? z : std::conj(z);
  const double n = static_cast<double>(a.rows());
  const double v = std::abs(z.imag());
  TraceComparison out;
  out.gap_squared = std::norm(stieltjes_of_spectrum(eigenvalues(a), w) - stieltjes_of_spectrum(eigenvalues(b), w));
  out.bound = (a - b).squaredNorm() / (n * v * v * v * v);
  if (out.gap_squared > out.bound + 1e-12) {
    throw BoundViolation("trace comparison inequality violated: gap^2 " + std::to_string(out.gap_squared) +
                         " > bound " + std::to_string(out.bound));
  }
  return out;
}

TraceComparison trace_comparison_bound(const SymmetricEnsemble& a, const SymmetricEnsemble& b,
                                       std::complex<double> z) {
  return trace_comparison_bound(a.entries, b.entries, z);
}

void write_spectrum_csv(const std::filesystem::path& path, const EmpiricalSpectrum& spectrum) {
  auto out = open_csv(path);
  out << "eigenvalue\n";
  for (double v : spectrum.eigenvalues) out << v << '\n';
}

void write_cdf_csv(const std::filesystem::path& path, const SampledCdf& cdf) {
  auto out = open_csv(path);
  out << "x,F\n";
  for (std::size_t i = 0; i < cdf.x.size(); ++i) out << cdf.x[i] << ',' << cdf.f[i] << '\n';
}

}  // namespace corrspec
