#include "corrspec/ensembles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "corrspec/errors.hpp"
#include "corrspec/spectral_empirics.hpp"

namespace corrspec {

SymmetricEnsemble SymmetricEnsemble::from_matrix(Eigen::MatrixXd m, Provenance provenance) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric ensemble needs a square matrix");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (m(i, j) != m(j, i)) throw DimensionError("matrix is not exactly symmetric");
    }
  }
  return SymmetricEnsemble{std::move(m), std::move(provenance)};
}

SymmetricEnsemble build_wigner(const FieldPatch& patch, WignerMode mode) {
  const int n = patch.rows();
  if (patch.cols() != n) {
    throw DimensionError("Wigner ensemble needs a square patch, got " + std::to_string(patch.rows()) + "x" +
                         std::to_string(patch.cols()));
  }
  const auto& p = patch.values;
  Eigen::MatrixXd m(n, n);
  if (mode == WignerMode::lower_triangle) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = j; i < n; ++i) {
        const double v = p(i, j) * scale;
        m(i, j) = v;
        m(j, i) = v;
      }
    }
  } else {
    const double denom = std::sqrt(2.0) * std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = j; i < n; ++i) {
        const double v = (p(i, j) + p(j, i)) / denom;
        m(i, j) = v;
        m(j, i) = v;
      }
    }
  }
  return SymmetricEnsemble{std::move(m), Provenance{"", 0, Normalization::inverse_sqrt_n}};
}

GramEnsemble build_gram(const FieldPatch& patch) {
  GramEnsemble g;
  g.rows = patch.rows();
  g.samples = patch.cols();
  g.matrix = Eigen::MatrixXd::Zero(g.rows, g.rows);
  g.matrix.selfadjointView<Eigen::Lower>().rankUpdate(patch.values, 1.0 / g.samples);
  g.matrix.triangularView<Eigen::StrictlyUpper>() = g.matrix.transpose();
  g.provenance.normalization = Normalization::none;
  return g;
}

SymmetricEnsemble embed_gram_symmetric(const FieldPatch& patch) {
  const int rows = patch.rows();
  const int samples = patch.cols();
  const int n = rows + samples;
  const double scale = 1.0 / std::sqrt(static_cast<double>(samples));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < samples; ++j) {
      const double v = patch.values(i, j) * scale;
      m(samples + i, j) = v;
      m(j, samples + i) = v;
    }
  }
  return SymmetricEnsemble{std::move(m), Provenance{"", 0, Normalization::inverse_sqrt_p}};
}

std::complex<double> gram_stieltjes_from_embedding(std::complex<double> s_embedding_at_sqrt_z, int rows, int samples,
                                                   std::complex<double> z) {
  const double n = static_cast<double>(rows) + samples;
  const double big_n = static_cast<double>(rows);
  return n / (2.0 * big_n) * s_embedding_at_sqrt_z / std::sqrt(z) +
         (static_cast<double>(samples) - big_n) / (2.0 * big_n * z);
}

int BlockingPlan::block_count(int n) const { return n / (block + gap) - 1; }

int BlockingPlan::remainder(int n) const { return n - block_count(n) * (block + gap) - block; }

void BlockingPlan::validate(int n) const {
  if (gap < 0) throw PlanError("blocking plan needs K >= 0");
  if (block <= gap) throw PlanError("blocking plan needs p > K");
  if (3 * (block + gap) > n) {
    throw PlanError("blocking plan needs p + K <= n / 3 (p=" + std::to_string(block) + ", K=" + std::to_string(gap) +
                    ", n=" + std::to_string(n) + ")");
  }
  if (block_count(n) < 1) throw PlanError("blocking plan yields no off-diagonal blocks");
  if (std::isnan(tau) || tau <= 0.0) throw PlanError("truncation level must be positive");
}

BlockingPlan BlockingPlan::defaults(int n, int gap) {
  BlockingPlan plan;
  plan.gap = gap;
  plan.block = static_cast<int>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-12));
  plan.tau = std::pow(static_cast<double>(n), -0.25);
  return plan;
}

int symmetric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd abs_values = solver.eigenvalues().cwiseAbs();
  const double largest = abs_values.maxCoeff();
  if (largest == 0.0) return 0;
  const double tol = largest * static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon();
  return static_cast<int>((abs_values.array() > tol).count());
}

BlockingReport lindeberg_decomposition_check(const SymmetricEnsemble& ensemble, const BlockingPlan& plan,
                                             std::complex<double> z, std::optional<double> truncated_mean) {
  const int n = ensemble.order();
  plan.validate(n);
  if (!(z.imag() > 0.0)) throw DomainError("Stieltjes evaluation needs Im z > 0");
  const auto& a = ensemble.entries;

  BlockingReport report;
  report.order = n;
  report.block_count = plan.block_count(n);
  report.remainder = plan.remainder(n);

  // Truncation: X 1{|X| <= tau} recentered by E(X 1{|X| <= tau}) = -E(X 1{|X| > tau}) for a centered field.
  double centering = 0.0;
  if (truncated_mean) {
    centering = *truncated_mean;
  } else {
    double clipped = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = j; i < n; ++i) {
        if (std::abs(a(i, j)) > plan.tau) clipped += a(i, j);
      }
    }
    centering = -clipped / (0.5 * static_cast<double>(n) * (n + 1));
  }
  report.truncated_mean = centering;
  report.truncated = Eigen::MatrixXd(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double v = (std::abs(a(i, j)) <= plan.tau ? a(i, j) : 0.0) - centering;
      report.truncated(i, j) = v;
      report.truncated(j, i) = v;
    }
  }

  // Index -> block label: I_l = [l (p+K), l (p+K) + p) for l = 0..q, -1 in gaps and the tail.
  const int stride = plan.block + plan.gap;
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (int l = 0; l <= report.block_count; ++l) {
    for (int i = l * stride; i < l * stride + plan.block; ++i) label[static_cast<std::size_t>(i)] = l;
  }

  report.blanked = report.truncated;
  report.blocked = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int li = label[static_cast<std::size_t>(i)];
      const int lj = label[static_cast<std::size_t>(j)];
      if (li >= 0 && li == lj) report.blanked(i, j) = 0.0;
      if (li >= 0 && lj >= 0 && li != lj) report.blocked(i, j) = report.truncated(i, j);
    }
  }

  report.rank_difference = symmetric_rank(report.blanked - report.blocked);
  report.rank_bound = 2 * (report.block_count * plan.gap + report.remainder);
  if (report.rank_difference > report.rank_bound) {
    throw BoundViolation("rank(X_hat - X_tilde) = " + std::to_string(report.rank_difference) + " exceeds " +
                         std::to_string(report.rank_bound));
  }

  const TraceComparison trace = trace_comparison_bound(report.truncated, report.blanked, z);
  report.trace_gap_squared = trace.gap_squared;
  report.trace_bound = trace.bound;

  const auto s_hat = stieltjes_of_spectrum(eigenvalues(report.blanked), z);
  const auto s_tilde = stieltjes_of_spectrum(eigenvalues(report.blocked), z);
  report.rank_gap = std::abs(s_hat - s_tilde);
  report.rank_gap_bound = std::numbers::pi * report.rank_difference / (z.imag() * n);
  if (report.rank_gap > report.rank_gap_bound + 1e-12) {
    throw BoundViolation("rank inequality for Stieltjes transforms violated");
  }
  return report;
}

}  // namespace corrspec
