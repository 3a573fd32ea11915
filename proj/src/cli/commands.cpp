#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <system_error>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "corrspec/cli.hpp"
#include "corrspec/errors.hpp"
#include "corrspec/parallel.hpp"
#include "corrspec/version.hpp"

namespace corrspec::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using cplx = std::complex<double>;

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

json gamma_json(const CovarianceFunction& gamma) {
  json lags = json::array();
  for (const auto& [lag, v] : gamma.nonzero_lags()) lags.push_back({{"lag", {lag.row, lag.col}}, {"value", v}});
  return {{"radius", gamma.radius()}, {"lags", lags}};
}

// Writes into a sibling staging directory, moved into place only when the command succeeds.
class Staging {
 public:
  explicit Staging(fs::path target) : target_(std::move(target)), dir_(target_.string() + ".partial") {
    fs::remove_all(dir_);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  const fs::path& dir() const { return dir_; }

  std::vector<std::string> commit() {
    std::error_code ec;
    fs::create_directories(target_, ec);
    if (ec) throw IoError("cannot create output directory " + target_.string() + ": " + ec.message());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir_)) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      fs::rename(dir_ / name, target_ / name, ec);
      if (ec) throw IoError("cannot move " + name + " into " + target_.string() + ": " + ec.message());
    }
    return names;
  }

 private:
  fs::path target_;
  fs::path dir_;
};

void run_simulate(const RunConfig& cfg, const fs::path& dir) {
  const ExperimentConfig& exp = cfg.experiment;
  write_json(dir / "gamma.json", gamma_json(analytic_gamma(exp.model)));
  auto table = open_csv(dir / "stieltjes.csv");
  table << "n,replicate,seed,ReZ,ImZ,ReS,ImS\n";
  for (int size : exp.sizes) {
    std::vector<EmpiricalSpectrum> spectra(static_cast<std::size_t>(exp.replicates));
    parallel_for(spectra.size(), exp.threads, [&](std::size_t r) {
      const FieldPatch patch = sample_field(exp.model, size, exp.samples_for(size),
                                            replicate_seed(exp.seed, size, static_cast<int>(r), 0));
      spectra[r] = exp.ensemble == EnsembleKind::gram ? eigenvalues(build_gram(patch))
                                                      : eigenvalues(build_wigner(patch, exp.wigner_mode));
    });
    for (std::size_t r = 0; r < spectra.size(); ++r) {
      write_spectrum_csv(dir / ("spectrum_n" + std::to_string(size) + "_r" + std::to_string(r) + ".csv"), spectra[r]);
      for (const cplx& z : exp.z_points) {
        const cplx s = stieltjes_of_spectrum(spectra[r], z);
        table << size << ',' << r << ',' << replicate_seed(exp.seed, size, static_cast<int>(r), 0) << ',' << z.real()
              << ',' << z.imag() << ',' << s.real() << ',' << s.imag() << '\n';
      }
    }
    std::cout << "simulated n=" << size << " replicates=" << exp.replicates << '\n';
  }
}

void run_solve(const RunConfig& cfg, const fs::path& dir) {
  const ExperimentConfig& exp = cfg.experiment;
  SolverConfig solver = exp.solver;
  SpectralKernel kernel;
  if (cfg.kernel) {
    kernel = SpectralKernel::constant(cfg.kernel->constant, solver.grid_size);
  } else {
    const CovarianceFunction gamma = analytic_gamma(exp.model);
    solver.grid_size = std::max(solver.grid_size, 2 * (2 * gamma.radius() + 1));
    if (exp.ensemble == EnsembleKind::wigner && !check_conditions(gamma).symmetric_exchange) {
      throw ConditionError("the symmetric-ensemble limit needs exchange symmetry gamma_{k,l} = gamma_{l,k}");
    }
    kernel = spectral_kernel(gamma, solver.grid_size);
  }
  const LimitEquation equation = exp.ensemble == EnsembleKind::wigner
                                     ? LimitEquation::wigner(kernel, solver)
                                     : LimitEquation::gram(kernel, exp.aspect, solver);

  std::vector<FixedPointSolution> points(exp.z_points.size());
  parallel_for(points.size(), exp.threads, [&](std::size_t i) { points[i] = equation.solve(exp.z_points[i]); });
  {
    auto out = open_csv(dir / "stieltjes.csv");
    out << "ReZ,ImZ,ReS,ImS,iterations,residual\n";
    for (const auto& p : points) {
      out << p.z.real() << ',' << p.z.imag() << ',' << p.stieltjes.real() << ',' << p.stieltjes.imag() << ','
          << p.iterations << ',' << p.residual << '\n';
      std::cout << "S(" << p.z.real() << (p.z.imag() < 0 ? "" : "+") << p.z.imag() << "i) = " << p.stieltjes.real()
                << (p.stieltjes.imag() < 0 ? "" : "+") << p.stieltjes.imag() << "i\n";
    }
  }

  const auto [lo, hi] = cfg.energy_window ? *cfg.energy_window : limit_energy_window(exp, kernel);
  std::vector<double> energies(static_cast<std::size_t>(exp.energy_points));
  for (int i = 0; i < exp.energy_points; ++i) {
    energies[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (exp.energy_points - 1);
  }
  const LimitSolution line = equation.solve_line(energies, exp.eta, exp.threads);
  write_solution_csv(dir / "solution.csv", line);
  const Inversion inversion = invert_stieltjes(line, exp.eta);
  write_cdf_csv(dir / "cdf.csv", inversion.cdf);
  std::cout << "density mass on [" << lo << ", " << hi << "] = " << inversion.mass << '\n';
}

void run_compare(const RunConfig& cfg, const fs::path& dir) {
  const LimitComparisonReport report = run_limit_comparison(cfg.experiment);
  write_json(dir / "report.json", to_json(report));
  write_cdf_csv(dir / "cdf.csv", report.limit.cdf);
  emit_plot_data(report, dir);
  for (const auto& s : report.sizes) {
    std::cout << "n=" << s.size << " levy=" << s.levy << " kolmogorov=" << s.kolmogorov << '\n';
  }
  std::cout << (report.passed ? "levy distance within threshold\n" : "levy distance above threshold\n");
}

void run_universality_command(const RunConfig& cfg, const fs::path& dir) {
  const UniversalityReport report = run_universality(cfg.experiment);
  write_json(dir / "report.json", to_json(report));
  emit_plot_data(report, dir);
  for (const auto& s : report.sizes) {
    const auto& p = s.points.front();
    std::cout << "n=" << s.size << " gap=" << p.gap << " se=" << p.standard_error << '\n';
  }
}

bool run_concentration_command(const RunConfig& cfg, const fs::path& dir) {
  const ConcentrationReport report = run_concentration(cfg.experiment, cfg.dependence, cfg.radii);
  write_json(dir / "report.json", to_json(report));
  emit_plot_data(report, dir);
  for (const auto& s : report.sizes) std::cout << "n=" << s.size << " std=" << s.std_dev << '\n';
  std::cout << "decay exponent " << report.decay_exponent << '\n';
  if (!report.bound_respected) std::cerr << "error: a tail frequency exceeded the concentration bound plus slack\n";
  return report.bound_respected;
}

bool run_selftest_command(const fs::path& dir) {
  const auto cases = run_selftest();
  json doc = json::array();
  int failed = 0;
  for (const auto& c : cases) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
    doc.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed) ++failed;
  }
  write_json(dir / "selftest.json", doc);
  if (failed > 0) std::cerr << "error: " << failed << " selftest case(s) failed\n";
  return failed == 0;
}

}  // namespace

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("corrspec");
    spdlog::set_default_logger(logger);
  });
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("CORRSPEC_LOG")) {
    const std::string v = env;
    if (v == "error") {
      level = spdlog::level::err;
    } else if (v == "warn") {
      level = spdlog::level::warn;
    } else if (v == "info") {
      level = spdlog::level::info;
    } else if (v == "debug") {
      level = spdlog::level::debug;
    } else {
      spdlog::warn("ignoring CORRSPEC_LOG={} (expected error, warn, info or debug)", v);
    }
  }
  spdlog::set_level(level);
}

bool execute(const RunConfig& cfg) {
  Staging staging(cfg.output);
  const fs::path& dir = staging.dir();
  bool ok = true;
  switch (cfg.command) {
    case Command::simulate:
      run_simulate(cfg, dir);
      break;
    case Command::solve:
      run_solve(cfg, dir);
      break;
    case Command::compare:
      run_compare(cfg, dir);
      break;
    case Command::universality:
      run_universality_command(cfg, dir);
      break;
    case Command::concentration:
      ok = run_concentration_command(cfg, dir);
      break;
    case Command::selftest:
      ok = run_selftest_command(dir);
      break;
  }
  json manifest;
  manifest["command"] = to_string(cfg.command);
  manifest["config_hash"] = cfg.hash;
  manifest["seed"] = cfg.seed;
  manifest["threads"] = cfg.experiment.threads;
  manifest["status"] = ok ? "ok" : "check_failed";
  manifest["versions"] = build_info();
  manifest["config"] = cfg.source;
  json artifacts = json::array();
  for (const auto& entry : fs::directory_iterator(dir)) artifacts.push_back(entry.path().filename().string());
  std::sort(artifacts.begin(), artifacts.end());
  manifest["artifacts"] = artifacts;
  write_json(dir / "manifest.json", manifest);
  staging.commit();
  return ok;
}

int run(const Flags& flags) {
  configure_logging();
  try {
    RunConfig cfg = load_config(flags.config);
    if (flags.seed) {
      cfg.seed = *flags.seed;
      cfg.experiment.seed = *flags.seed;
      cfg.source["seed"] = *flags.seed;
    }
    if (flags.out) cfg.output = *flags.out;
    if (flags.threads) {
      if (*flags.threads < 1) throw ConfigError("--threads must be at least 1");
      cfg.experiment.threads = *flags.threads;
    }
    cfg.hash = config_hash(cfg.source);
    cfg.experiment.config_hash = cfg.hash;
    return execute(cfg) ? 0 : 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << " after " << e.iterations()
              << " iterations)\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Spectra of random matrices built from stationary correlated fields"};
  Flags flags;
  std::string config;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--config", config, "JSON run configuration")->required();
  auto* out_opt = app.add_option("--out", out, "output directory (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: logical cores)");
  auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  flags.config = config;
  if (*out_opt) flags.out = out;
  if (*threads_opt) flags.threads = threads;
  if (*seed_opt) flags.seed = seed;
  return run(flags);
}

}  // namespace corrspec::cli
