#include "corrspec/concentration_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <boost/math/distributions/binomial.hpp>
#include <spdlog/spdlog.h>

#include "corrspec/errors.hpp"
#include "corrspec/parallel.hpp"
#include "corrspec/random.hpp"

namespace corrspec {

namespace {

using cplx = std::complex<double>;

// Sample variance of complex values, E|S - mean|^2 with the R - 1 denominator.
double complex_variance(const std::vector<cplx>& values, cplx mean) {
  if (values.size() < 2) return 0.0;
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v - mean);
  return s / static_cast<double>(values.size() - 1);
}

cplx complex_mean(const std::vector<cplx>& values) {
  cplx s = 0.0;
  for (const cplx& v : values) s += v;
  return s / static_cast<double>(values.size());
}

nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return out;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double t) {
  if (x.empty() || t < x.front() || t > x.back()) return 0.0;
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.end()) return y.back();
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

EmpiricalSpectrum replicate_spectrum(const ExperimentConfig& cfg, const FieldModel& model, int size,
                                     std::uint64_t seed) {
  const FieldPatch patch = sample_field(model, size, cfg.samples_for(size), seed);
  if (cfg.ensemble == EnsembleKind::gram) return eigenvalues(build_gram(patch));
  return eigenvalues(build_wigner(patch, cfg.wigner_mode));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw ConfigError("experiment needs at least one size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2) throw ConfigError("experiment sizes must be at least 2");
    if (i > 0 && !(sizes[i] > sizes[i - 1])) throw ConfigError("experiment sizes must be strictly ascending");
  }
  if (replicates < 1) throw ConfigError("experiment needs at least one replicate");
  if (z_points.empty()) throw ConfigError("experiment needs at least one z point");
  for (const cplx& z : z_points) {
    if (!(z.imag() > 0.0)) throw ConfigError("z points must lie in the upper half-plane");
  }
  if (ensemble == EnsembleKind::gram && !(aspect > 0.0)) throw ConfigError("Gram aspect ratio c must be positive");
  if (!(eta > 0.0)) throw ConfigError("inversion eta must be positive");
  if (energy_points < 16) throw ConfigError("energy grid needs at least 16 points");
  if (!(levy_threshold > 0.0)) throw ConfigError("Levy threshold must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  solver.validate();
}

int ExperimentConfig::samples_for(int size) const {
  if (ensemble == EnsembleKind::wigner) return size;
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(size) / aspect)));
}

std::uint64_t replicate_seed(std::uint64_t base, int size, int replicate, int role) {
  return rng::derive_seed(base, {static_cast<std::uint64_t>(size), static_cast<std::uint64_t>(replicate),
                                 static_cast<std::uint64_t>(role)});
}

std::vector<cplx> replicate_stieltjes(const ExperimentConfig& cfg, const FieldModel& model, int size,
                                      std::uint64_t seed) {
  const EmpiricalSpectrum spectrum = replicate_spectrum(cfg, model, size, seed);
  std::vector<cplx> out;
  out.reserve(cfg.z_points.size());
  for (const cplx& z : cfg.z_points) out.push_back(stieltjes_of_spectrum(spectrum, z));
  return out;
}

UniversalityReport run_universality(const ExperimentConfig& cfg) {
  cfg.validate();
  const FieldModel twin = GaussianMatchedModel{analytic_gamma(cfg.model)};
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);

  UniversalityReport report;
  report.config_hash = cfg.config_hash;
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;

  for (int size : cfg.sizes) {
    // Cell 2r is replicate r of the model, cell 2r + 1 its Gaussian twin.
    std::vector<std::vector<cplx>> cells(2 * reps);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t cell) {
      const int r = static_cast<int>(cell / 2);
      const int role = static_cast<int>(cell % 2);
      cells[cell] = replicate_stieltjes(cfg, role == 0 ? cfg.model : twin, size,
                                        replicate_seed(cfg.seed, size, r, role));
    });

    UniversalitySize at{size, {}};
    for (std::size_t k = 0; k < cfg.z_points.size(); ++k) {
      std::vector<cplx> xs(reps);
      std::vector<cplx> gs(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        xs[r] = cells[2 * r][k];
        gs[r] = cells[2 * r + 1][k];
      }
      UniversalityPoint p;
      p.z = cfg.z_points[k];
      p.mean_x = complex_mean(xs);
      p.mean_g = complex_mean(gs);
      p.gap = std::abs(p.mean_x - p.mean_g);
      const double r = static_cast<double>(reps);
      p.standard_error = std::sqrt(complex_variance(xs, p.mean_x) / r + complex_variance(gs, p.mean_g) / r);
      for (const cplx& x : xs) p.deviations.push_back(std::abs(x - p.mean_g));
      at.points.push_back(std::move(p));
    }
    spdlog::info("universality n={} gap(z0)={:.3e} se={:.3e}", size, at.points.front().gap,
                 at.points.front().standard_error);
    report.sizes.push_back(std::move(at));
  }

  for (std::size_t s = 1; s < report.sizes.size(); ++s) {
    for (std::size_t k = 0; k < cfg.z_points.size(); ++k) {
      const auto& prev = report.sizes[s - 1].points[k];
      const auto& cur = report.sizes[s].points[k];
      // Standard error of the difference of the two gaps.
      const double se = std::hypot(prev.standard_error, cur.standard_error);
      if (cur.gap > prev.gap + 2.0 * se) report.gap_decreasing = false;
    }
  }
  if (!report.gap_decreasing) spdlog::warn("universality gap did not decrease along the size list");
  return report;
}

std::pair<double, double> limit_energy_window(const ExperimentConfig& cfg, const SpectralKernel& kernel) {
  const double fmax = std::max(kernel.values.maxCoeff(), 0.0);
  if (cfg.ensemble == EnsembleKind::wigner) {
    const double edge = 2.0 * std::sqrt(fmax);
    return {-1.1 * edge - 0.5, 1.1 * edge + 0.5};
  }
  const double s = 1.0 + std::sqrt(cfg.aspect);
  return {-0.5, 1.1 * fmax * s * s + 0.5};
}

LimitComparisonReport run_limit_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  const CovarianceFunction gamma = analytic_gamma(cfg.model);
  const ConditionReport conditions = check_conditions(gamma);
  if (cfg.ensemble == EnsembleKind::wigner && !conditions.symmetric_exchange) {
    throw ConditionError("the symmetric-ensemble limit needs exchange symmetry gamma_{k,l} = gamma_{l,k}");
  }
  const int grid = std::max(cfg.solver.grid_size, 2 * (2 * gamma.radius() + 1));
  SolverConfig solver = cfg.solver;
  solver.grid_size = grid;
  const SpectralKernel kernel = spectral_kernel(gamma, grid);
  const LimitEquation equation = cfg.ensemble == EnsembleKind::wigner
                                     ? LimitEquation::wigner(kernel, solver)
                                     : LimitEquation::gram(kernel, cfg.aspect, solver);

  const auto [lo, hi] = limit_energy_window(cfg, kernel);
  const std::vector<double> energies = linspace(lo, hi, cfg.energy_points);
  const LimitSolution solution = equation.solve_line(energies, cfg.eta, cfg.threads);

  LimitComparisonReport report;
  report.config_hash = cfg.config_hash;
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;
  report.levy_threshold = cfg.levy_threshold;
  report.limit = invert_stieltjes(solution, cfg.eta);
  const DistributionFunction limit_cdf(report.limit.cdf);

  for (int size : cfg.sizes) {
    std::vector<EmpiricalSpectrum> spectra(static_cast<std::size_t>(cfg.replicates));
    parallel_for(spectra.size(), cfg.threads, [&](std::size_t r) {
      spectra[r] = replicate_spectrum(cfg, cfg.model, size, replicate_seed(cfg.seed, size, static_cast<int>(r), 0));
    });
    DistanceAtSize d;
    d.size = size;
    d.pooled = EmpiricalSpectrum::pooled(spectra);
    const DistributionFunction empirical(d.pooled);
    d.levy = distribution_distance(empirical, limit_cdf, DistanceKind::levy);
    d.kolmogorov = distribution_distance(empirical, limit_cdf, DistanceKind::kolmogorov);
    spdlog::info("limit comparison n={} levy={:.4f} kolmogorov={:.4f}", size, d.levy, d.kolmogorov);
    report.sizes.push_back(std::move(d));
  }
  report.passed = report.sizes.back().levy <= cfg.levy_threshold;
  return report;
}

double concentration_bound(int n, double r, double v, int dependence) {
  return 4.0 * std::exp(-static_cast<double>(n) * r * r * v * v / (2560.0 * std::max(dependence, 1)));
}

double binomial_slack(int replicates, double p) {
  if (p >= 1.0) return 0.0;
  if (p <= 0.0) return 0.0;
  using Policy = boost::math::policies::policy<
      boost::math::policies::discrete_quantile<boost::math::policies::integer_round_up>>;
  const boost::math::binomial_distribution<double, Policy> law(replicates, p);
  const double k = boost::math::quantile(law, 0.99);
  return std::max(0.0, k / replicates - p);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("slope fit needs two or more matching points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConcentrationReport run_concentration(const ExperimentConfig& cfg, int dependence, const std::vector<double>& radii) {
  cfg.validate();
  if (dependence < 0) throw ModelError("dependence range K must be nonnegative");
  const int range = dependence_range(cfg.model);
  if (range > dependence) {
    throw ModelError("model is " + std::to_string(range) + "-dependent, not " + std::to_string(dependence) +
                     "-dependent as declared");
  }
  for (double r : radii) {
    if (!(r >= 0.0)) throw ConfigError("tail radii must be nonnegative");
  }

  ConcentrationReport report;
  report.config_hash = cfg.config_hash;
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;
  report.dependence = std::max(dependence, 1);
  report.z = cfg.z_points.front();
  ExperimentConfig single = cfg;
  single.z_points = {report.z};

  std::vector<double> ns;
  std::vector<double> stds;
  for (int size : cfg.sizes) {
    std::vector<cplx> values(static_cast<std::size_t>(cfg.replicates));
    parallel_for(values.size(), cfg.threads, [&](std::size_t r) {
      values[r] =
          replicate_stieltjes(single, cfg.model, size, replicate_seed(cfg.seed, size, static_cast<int>(r), 0)).front();
    });
    ConcentrationSize at;
    at.size = size;
    at.mean = complex_mean(values);
    at.std_dev = std::sqrt(complex_variance(values, at.mean));
    for (double r : radii) {
      TailPoint t;
      t.r = r;
      const auto hits = std::count_if(values.begin(), values.end(), [&](cplx s) { return std::abs(s - at.mean) >= r; });
      t.frequency = static_cast<double>(hits) / cfg.replicates;
      t.bound = concentration_bound(size, r, report.z.imag(), report.dependence);
      t.slack = binomial_slack(cfg.replicates, t.bound);
      t.within = t.frequency <= t.bound + t.slack + 1e-12;
      if (!t.within) report.bound_respected = false;
      at.tails.push_back(t);
    }
    spdlog::info("concentration n={} std={:.3e}", size, at.std_dev);
    ns.push_back(size);
    stds.push_back(at.std_dev);
    report.sizes.push_back(std::move(at));
  }
  if (ns.size() >= 2 && std::all_of(stds.begin(), stds.end(), [](double s) { return s > 0.0; })) {
    report.decay_exponent = log_log_slope(ns, stds);
  } else {
    report.decay_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

nlohmann::json to_json(const UniversalityReport& report) {
  nlohmann::json j;
  j["kind"] = "universality";
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["replicates"] = report.replicates;
  j["gap_decreasing"] = report.gap_decreasing;
  j["sizes"] = nlohmann::json::array();
  for (const auto& s : report.sizes) {
    nlohmann::json js{{"size", s.size}, {"points", nlohmann::json::array()}};
    for (const auto& p : s.points) {
      js["points"].push_back({{"z", complex_json(p.z)},
                              {"mean_x", complex_json(p.mean_x)},
                              {"mean_g", complex_json(p.mean_g)},
                              {"gap", p.gap},
                              {"standard_error", p.standard_error},
                              {"deviations", p.deviations}});
    }
    j["sizes"].push_back(std::move(js));
  }
  return j;
}

nlohmann::json to_json(const LimitComparisonReport& report) {
  nlohmann::json j;
  j["kind"] = "limit_comparison";
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["replicates"] = report.replicates;
  j["levy_threshold"] = report.levy_threshold;
  j["passed"] = report.passed;
  j["limit_mass"] = report.limit.mass;
  j["sizes"] = nlohmann::json::array();
  for (const auto& s : report.sizes) {
    j["sizes"].push_back({{"size", s.size}, {"levy", s.levy}, {"kolmogorov", s.kolmogorov}});
  }
  return j;
}

nlohmann::json to_json(const ConcentrationReport& report) {
  nlohmann::json j;
  j["kind"] = "concentration";
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["replicates"] = report.replicates;
  j["dependence"] = report.dependence;
  j["z"] = complex_json(report.z);
  j["bound_respected"] = report.bound_respected;
  if (std::isfinite(report.decay_exponent)) {
    j["decay_exponent"] = report.decay_exponent;
  } else {
    j["decay_exponent"] = nullptr;
  }
  j["sizes"] = nlohmann::json::array();
  for (const auto& s : report.sizes) {
    nlohmann::json js{{"size", s.size}, {"mean", complex_json(s.mean)}, {"std", s.std_dev}};
    js["tails"] = nlohmann::json::array();
    for (const auto& t : s.tails) {
      js["tails"].push_back(
          {{"r", t.r}, {"frequency", t.frequency}, {"bound", t.bound}, {"slack", t.slack}, {"within", t.within}});
    }
    j["sizes"].push_back(std::move(js));
  }
  return j;
}

int histogram_bins(const std::vector<double>& sorted_values) {
  constexpr int kFloor = 32;
  constexpr int kCeiling = 4096;
  const std::size_t n = sorted_values.size();
  if (n < 4) return kFloor;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return i + 1 < n ? (1.0 - w) * sorted_values[i] + w * sorted_values[i + 1] : sorted_values[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double range = sorted_values.back() - sorted_values.front();
  if (!(iqr > 0.0) || !(range > 0.0)) return kFloor;
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  const int bins = static_cast<int>(std::ceil(range / width));
  return std::clamp(bins, kFloor, kCeiling);
}

std::vector<std::filesystem::path> emit_plot_data(const LimitComparisonReport& report,
                                                  const std::filesystem::path& dir) {
  const auto overlay_path = dir / "density_overlay.csv";
  const auto distance_path = dir / "distance_vs_n.csv";
  {
    auto out = open_csv(overlay_path);
    out << "E,empirical_density,solver_density\n";
    if (!report.sizes.empty() && !report.sizes.back().pooled.eigenvalues.empty()) {
      const auto& values = report.sizes.back().pooled.eigenvalues;
      const int bins = histogram_bins(values);
      const double lo = values.front();
      const double hi = values.back();
      const double width = hi > lo ? (hi - lo) / bins : 1.0;
      std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
      for (double v : values) {
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        counts[static_cast<std::size_t>(b)] += 1.0;
      }
      for (int b = 0; b < bins; ++b) {
        const double center = lo + (b + 0.5) * width;
        const double empirical = counts[static_cast<std::size_t>(b)] / (static_cast<double>(values.size()) * width);
        out << center << ',' << empirical << ','
            << interpolate(report.limit.energies, report.limit.density, center) << '\n';
      }
    }
  }
  {
    auto out = open_csv(distance_path);
    out << "n,levy,kolmogorov\n";
    for (const auto& s : report.sizes) out << s.size << ',' << s.levy << ',' << s.kolmogorov << '\n';
  }
  return {overlay_path, distance_path};
}

std::vector<std::filesystem::path> emit_plot_data(const UniversalityReport& report, const std::filesystem::path& dir) {
  const auto path = dir / "gap_vs_n.csv";
  auto out = open_csv(path);
  out << "n,ReZ,ImZ,gap,standard_error\n";
  for (const auto& s : report.sizes) {
    for (const auto& p : s.points) {
      out << s.size << ',' << p.z.real() << ',' << p.z.imag() << ',' << p.gap << ',' << p.standard_error << '\n';
    }
  }
  return {path};
}

std::vector<std::filesystem::path> emit_plot_data(const ConcentrationReport& report, const std::filesystem::path& dir) {
  const auto tail_path = dir / "tail_vs_r.csv";
  const auto std_path = dir / "std_vs_n.csv";
  {
    auto out = open_csv(tail_path);
    out << "n,r,frequency,bound,slack\n";
    for (const auto& s : report.sizes) {
      for (const auto& t : s.tails) {
        out << s.size << ',' << t.r << ',' << t.frequency << ',' << t.bound << ',' << t.slack << '\n';
      }
    }
  }
  {
    auto out = open_csv(std_path);
    out << "n,std\n";
    for (const auto& s : report.sizes) out << s.size << ',' << s.std_dev << '\n';
  }
  return {tail_path, std_path};
}

}  // namespace corrspec
