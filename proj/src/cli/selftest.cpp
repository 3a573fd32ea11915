#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "corrspec/cli.hpp"
#include "corrspec/errors.hpp"

namespace corrspec::cli {

namespace {

using cplx = std::complex<double>;
using Check = std::function<std::string()>;  // empty string means pass

std::string near(double got, double want, double tol, const char* what) {
  if (std::abs(got - want) <= tol) return {};
  std::ostringstream out;
  out.precision(12);
  out << what << " = " << got << ", expected " << want;
  return out.str();
}

std::string near(cplx got, cplx want, double tol, const char* what) {
  if (std::abs(got - want) <= tol) return {};
  std::ostringstream out;
  out.precision(12);
  out << what << " = " << got << ", expected " << want;
  return out.str();
}

SolverConfig quick_solver() {
  SolverConfig cfg;
  cfg.grid_size = 16;
  return cfg;
}

}  // namespace

std::vector<SelftestCase> run_selftest() {
  const InnovationSpec gauss{InnovationLaw::standard_gaussian, 1.0};
  const std::vector<std::pair<std::string, Check>> checks = {
      {"rademacher innovations take values +-1",
       [] {
         const auto p = sample_innovations({InnovationLaw::rademacher, 1.0}, 2, 2, 7);
         for (double v : p.values.reshaped()) {
           if (v != 1.0 && v != -1.0) return std::string("entry outside {-1, +1}");
         }
         return std::string();
       }},
      {"samplers are deterministic in the seed",
       [&] {
         const auto a = sample_innovations(gauss, 5, 4, 11);
         const auto b = sample_innovations(gauss, 5, 4, 11);
         return a.values == b.values ? std::string() : std::string("patches differ");
       }},
      {"identity filter reproduces the innovations",
       [&] {
         LinearCoefficients c;
         c.values[{0, 0}] = 1.0;
         const auto x = sample_linear_field(c, gauss, 6, 6, 3);
         const auto xi = sample_innovations(gauss, 6, 6, 3);
         return x.values == xi.values ? std::string() : std::string("field differs from innovations");
       }},
      {"doubling the filter doubles the field",
       [&] {
         LinearCoefficients c;
         c.values[{0, 0}] = 1.0;
         c.values[{1, 0}] = 0.5;
         LinearCoefficients d = c;
         for (auto& [o, a] : d.values) a *= 2.0;
         const auto x = sample_linear_field(c, gauss, 5, 5, 9);
         const auto y = sample_linear_field(d, gauss, 5, 5, 9);
         return y.values == 2.0 * x.values ? std::string() : std::string("not exactly doubled");
       }},
      {"window m = 0 keeps only the origin",
       [] {
         LinearCoefficients c;
         c.values[{0, 0}] = 1.0;
         c.values[{3, 0}] = 1.0;
         const auto t = truncate_to_window(c, WindowParameter{0});
         return t.values.size() == 1 && t.values.count({0, 0}) ? std::string() : std::string("wrong support");
       }},
      {"white filter has white covariance",
       [] {
         LinearCoefficients c;
         c.values[{0, 0}] = 1.0;
         const auto g = gamma_from_linear(c, 1.0);
         return g.nonzero_lags().size() == 1 ? near(g.at(0, 0), 1.0, 0.0, "gamma_00") : "extra lags";
       }},
      {"white covariance gives a constant kernel",
       [] {
         CovarianceFunction g(0);
         g.set(0, 0, 2.0);
         const auto k = spectral_kernel(g, 8);
         return near(k.values.maxCoeff() - k.values.minCoeff(), 0.0, 1e-14, "spread of f") +
                near(k.values(0, 0), 2.0, 1e-14, "f");
       }},
      {"white covariance is exchange-symmetric and separable",
       [] {
         CovarianceFunction g(0);
         g.set(0, 0, 1.0);
         const auto r = check_conditions(g);
         return r.symmetric_exchange && r.separable ? std::string() : std::string("conditions not detected");
       }},
      {"2x2 Wigner build mirrors the lower triangle",
       [] {
         FieldPatch p{{}, Eigen::MatrixXd(2, 2)};
         p.values << 1.0, 9.0, 2.0, 3.0;
         const auto e = build_wigner(p, WignerMode::lower_triangle);
         Eigen::MatrixXd want(2, 2);
         want << 1.0, 2.0, 2.0, 3.0;
         want /= std::sqrt(2.0);
         return near((e.entries - want).cwiseAbs().maxCoeff(), 0.0, 1e-15, "entry error");
       }},
      {"1x1 Gram matrix is x^2",
       [] {
         FieldPatch p{{}, Eigen::MatrixXd::Constant(1, 1, 3.0)};
         return near(build_gram(p).matrix(0, 0), 9.0, 0.0, "B");
       }},
      {"zero patch embeds to the zero matrix",
       [] {
         FieldPatch p{{}, Eigen::MatrixXd::Zero(3, 2)};
         const auto e = embed_gram_symmetric(p);
         return near(stieltjes_of_spectrum(eigenvalues(e), {0.3, 0.7}), -1.0 / cplx(0.3, 0.7), 1e-15, "S");
       }},
      {"eigenvalues of diag(1,2,3) and [[0,1],[1,0]]",
       [] {
         const auto a = eigenvalues(Eigen::MatrixXd(Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal()));
         Eigen::MatrixXd b(2, 2);
         b << 0.0, 1.0, 1.0, 0.0;
         const auto s = eigenvalues(b);
         return near(a.eigenvalues[0], 1.0, 1e-14, "l1") + near(a.eigenvalues[2], 3.0, 1e-14, "l3") +
                near(s.eigenvalues[0], -1.0, 1e-14, "m1") + near(s.eigenvalues[1], 1.0, 1e-14, "m2");
       }},
      {"Stieltjes transforms of {0} and {-1, 1} at i",
       [] {
         const cplx i(0.0, 1.0);
         return near(stieltjes_of_spectrum(EmpiricalSpectrum{{0.0}}, i), i, 1e-15, "S{0}") +
                near(stieltjes_of_spectrum(EmpiricalSpectrum{{-1.0, 1.0}}, i), 0.5 * i, 1e-15, "S{-1,1}");
       }},
      {"Levy distance of a CDF to itself is 0",
       [] {
         const DistributionFunction f(EmpiricalSpectrum::from_values({-1.0, 0.2, 0.4}));
         return near(distribution_distance(f, f, DistanceKind::levy), 0.0, 0.0, "L(F,F)");
       }},
      {"steps at 0 and 0.3: Levy 0.3, Kolmogorov 1",
       [] {
         const DistributionFunction f(EmpiricalSpectrum{{0.0}});
         const DistributionFunction g(EmpiricalSpectrum{{0.3}});
         return near(distribution_distance(f, g, DistanceKind::levy), 0.3, 2e-6, "levy") +
                near(distribution_distance(f, g, DistanceKind::kolmogorov), 1.0, 0.0, "kolmogorov");
       }},
      {"trace comparison of a matrix with itself",
       [] {
         const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
         const auto t = trace_comparison_bound(a, a, {0.0, 1.0});
         return near(t.gap_squared, 0.0, 0.0, "gap") + near(t.bound, 0.0, 0.0, "bound");
       }},
      {"zero kernel gives h = -1/z",
       [] {
         const cplx z(0.4, 0.3);
         const auto sk = solve_kp(SpectralKernel::constant(0.0, 16), z, quick_solver());
         const auto sg = solve_gram_limit(SpectralKernel::constant(0.0, 16), 0.5, z, quick_solver());
         return near(sk.stieltjes, -1.0 / z, 1e-12, "S wigner") + near(sg.stieltjes, -1.0 / z, 1e-12, "S gram");
       }},
      {"unit kernel gives the semicircle at i",
       [] {
         const auto s = solve_kp(SpectralKernel::constant(1.0, 16), {0.0, 1.0}, quick_solver());
         return near(s.stieltjes, cplx(0.0, (std::sqrt(5.0) - 1.0) / 2.0), 1e-8, "S(i)");
       }},
      {"separable route with a point mass at 0",
       [] {
         const cplx z(-0.2, 0.5);
         const auto s = solve_separable(SpectralMeasureOnLine::point_mass(0.0), z, quick_solver());
         return near(s.h, 0.0, 0.0, "h") + near(s.stieltjes, -1.0 / z, 1e-15, "S");
       }},
      {"concentration bound at r = 0 is 4",
       [] { return near(concentration_bound(256, 0.0, 1.0, 2), 4.0, 0.0, "bound"); }},
      {"degenerate blocking plan is rejected",
       [] {
         try {
           BlockingPlan{12, 0, 1.0}.validate(12);
         } catch (const PlanError&) {
           return std::string();
         }
         return std::string("plan with p = n accepted");
       }},
  };

  std::vector<SelftestCase> out;
  for (const auto& [name, check] : checks) {
    SelftestCase c{name, false, {}};
    try {
      c.detail = check();
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.detail = std::string("threw: ") + e.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace corrspec::cli
