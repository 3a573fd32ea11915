#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "corrspec/ensembles.hpp"
#include "corrspec/errors.hpp"
#include "corrspec/spectral_empirics.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace corrspec;
using cplx = std::complex<double>;

namespace {

FieldPatch integer_patch(std::mt19937_64& rng, int rows, int cols, int lo = -5, int hi = 5) {
  std::uniform_int_distribution<int> d(lo, hi);
  FieldPatch p{{}, Eigen::MatrixXd(rows, cols)};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) p.values(i, j) = d(rng);
  }
  return p;
}

cplx random_upper(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(-3.0, 3.0);
  std::uniform_real_distribution<double> im(0.05, 2.0);
  return {re(rng), im(rng)};
}

// S_B(z) from the embedding's eigenvalues, checked against S_B from B's own eigenvalues.
double embedding_identity_error(const FieldPatch& p, cplx z) {
  const int n_rows = p.rows();
  const int p_cols = p.cols();
  const auto emb = embed_gram_symmetric(p);
  const cplx sqrt_z = std::sqrt(z);
  const cplx s_x = oracle::stieltjes(oracle::jacobi_eigenvalues(emb.entries), sqrt_z);
  const cplx lhs = gram_stieltjes_from_embedding(s_x, n_rows, p_cols, z);
  const Eigen::MatrixXd b = p.values * p.values.transpose() / p_cols;
  const cplx rhs = oracle::stieltjes(oracle::jacobi_eigenvalues(b), z);
  return std::abs(lhs - rhs);
}

}  // namespace

TEST(Wigner, TwoByTwoLowerTriangle) {
  FieldPatch p{{}, Eigen::MatrixXd(2, 2)};
  p.values << 1.5, 100.0, -2.0, 3.0;
  const auto w = build_wigner(p, WignerMode::lower_triangle);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(w.entries(0, 0), 1.5 * s);
  EXPECT_EQ(w.entries(1, 0), -2.0 * s);
  EXPECT_EQ(w.entries(0, 1), -2.0 * s);
  EXPECT_EQ(w.entries(1, 1), 3.0 * s);
  EXPECT_EQ(w.provenance.normalization, Normalization::inverse_sqrt_n);
}

TEST(Wigner, SymmetrizedAverageOnSymmetricPatch) {
  std::mt19937_64 rng(1);
  auto p = integer_patch(rng, 6, 6);
  p.values = (p.values + p.values.transpose()).eval();
  const auto w = build_wigner(p, WignerMode::symmetrized_average);
  const Eigen::MatrixXd want = std::sqrt(2.0) * p.values / std::sqrt(6.0);
  EXPECT_LE((w.entries - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Wigner, DiagonalPatchEigenvalues) {
  FieldPatch p{{}, Eigen::MatrixXd::Zero(4, 4)};
  p.values.diagonal() << 3.0, -1.0, 2.0, 0.5;
  const auto e = eigenvalues(build_wigner(p, WignerMode::lower_triangle));
  const std::vector<double> want = {-0.5, 0.25, 1.0, 1.5};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.eigenvalues[static_cast<std::size_t>(i)], want[i], 1e-14);
}

TEST(Wigner, NonSquareRejected) {
  EXPECT_THROW(build_wigner(FieldPatch{{}, Eigen::MatrixXd::Zero(3, 4)}, WignerMode::lower_triangle), DimensionError);
}

TEST(Wigner, BuiltMatricesAreExactlySymmetric) {
  for (const auto& [name, model] : corpus::models()) {
    const auto x = sample_field(model, 40, 40, 9);
    for (auto mode : {WignerMode::lower_triangle, WignerMode::symmetrized_average}) {
      const auto w = build_wigner(x, mode);
      EXPECT_TRUE(w.entries == w.entries.transpose()) << name;
    }
    const auto e = embed_gram_symmetric(x);
    EXPECT_TRUE(e.entries == e.entries.transpose()) << name;
    const auto g = build_gram(x);
    EXPECT_TRUE(g.matrix == g.matrix.transpose()) << name;
  }
}

TEST(SymmetricEnsemble, FromMatrixChecksSymmetry) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2.0000001, 1;
  EXPECT_THROW(SymmetricEnsemble::from_matrix(m), DimensionError);
  EXPECT_THROW(SymmetricEnsemble::from_matrix(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST(Gram, OneByOne) {
  FieldPatch p{{}, Eigen::MatrixXd::Constant(1, 1, -3.0)};
  const auto g = build_gram(p);
  EXPECT_EQ(g.matrix(0, 0), 9.0);
  EXPECT_EQ(g.aspect(), 1.0);
}

TEST(Gram, OrthogonalColumnsGiveIdentity) {
  // Rows of a 4x4 Hadamard matrix: B = (1/4) H H^T = I.
  FieldPatch p{{}, Eigen::MatrixXd(4, 4)};
  p.values << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  EXPECT_LE((build_gram(p).matrix - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gram, TraceIdentity) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto p = integer_patch(rng, 7, 4);
    EXPECT_NEAR(build_gram(p).matrix.trace(), p.values.squaredNorm() / 4.0, 1e-12);
  }
}

TEST(Gram, NonzeroSpectraOfBothProductsCoincide) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto p = integer_patch(rng, 3 + t % 7, 2 + t % 5);
    const int n_rows = p.rows();
    const int p_cols = p.cols();
    auto a = oracle::jacobi_eigenvalues(p.values * p.values.transpose() / p_cols);
    auto b = oracle::jacobi_eigenvalues(p.values.transpose() * p.values / p_cols);
    const int r = std::min(n_rows, p_cols);
    for (int i = 0; i < r; ++i) {
      EXPECT_NEAR(a[static_cast<std::size_t>(n_rows - 1 - i)], b[static_cast<std::size_t>(p_cols - 1 - i)], 1e-9);
    }
  }
}

TEST(Embedding, OneByOne) {
  FieldPatch p{{}, Eigen::MatrixXd::Constant(1, 1, 1.0)};
  const auto e = embed_gram_symmetric(p);
  Eigen::MatrixXd want(2, 2);
  want << 0, 1, 1, 0;
  EXPECT_EQ(e.entries, want);
  EXPECT_EQ(e.provenance.normalization, Normalization::inverse_sqrt_p);
  const cplx z(0.0, 1.0);
  // Eigenvalues {-1, 1} and {1}: S_X(sqrt i) = sqrt i / (1 - i), S_B(i) = 1 / (1 - i).
  const cplx sq = std::sqrt(z);
  const cplx s_x = 0.5 * (1.0 / (-1.0 - sq) + 1.0 / (1.0 - sq));
  EXPECT_NEAR(std::abs(gram_stieltjes_from_embedding(s_x, 1, 1, z) - 1.0 / (1.0 - z)), 0.0, 1e-12);
}

TEST(Embedding, ZeroPatch) {
  const auto e = embed_gram_symmetric(FieldPatch{{}, Eigen::MatrixXd::Zero(2, 3)});
  EXPECT_EQ(e.entries.cwiseAbs().maxCoeff(), 0.0);
  const cplx z(0.3, 0.8);
  EXPECT_NEAR(std::abs(stieltjes_of_spectrum(eigenvalues(e), z) + 1.0 / z), 0.0, 1e-15);
}

TEST(Embedding, IntegerThreeByTwo) {
  std::mt19937_64 rng(6);
  EXPECT_LE(embedding_identity_error(integer_patch(rng, 3, 2), {0.7, 0.9}), 1e-10);
}

TEST(Embedding, RandomSmallInstances) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 20);
  std::normal_distribution<double> g;
  for (int t = 0; t < 30; ++t) {
    FieldPatch p{{}, Eigen::MatrixXd(dim(rng), dim(rng))};
    for (double& v : p.values.reshaped()) v = g(rng);
    for (int k = 0; k < 10; ++k) EXPECT_LE(embedding_identity_error(p, random_upper(rng)), 1e-9);
  }
}

// For a Gaussian field with gamma_{k,l} = gamma_{l,k}, the lower-triangle and
// symmetrized builds share a limit; the mean gap at z = i should not grow with n.
TEST(Wigner, BuildModesApproachEachOther) {
  const auto gamma = analytic_gamma(LinearModel{corpus::separable_linear({0.5, 1.0, 0.5}), {}});
  const cplx z(0.0, 1.0);
  std::vector<double> gaps;
  std::vector<double> ses;
  for (int n : {64, 256}) {
    const int reps = 50;
    std::vector<double> diff_re;
    std::vector<double> diff_im;
    for (int r = 0; r < reps; ++r) {
      const auto a = sample_gaussian_matched_field(gamma, n, n, 1000 + 2 * r + n);
      const auto b = sample_gaussian_matched_field(gamma, n, n, 1001 + 2 * r + n);
      const cplx sa = stieltjes_of_spectrum(eigenvalues(build_wigner(a, WignerMode::lower_triangle)), z);
      const cplx sb = stieltjes_of_spectrum(eigenvalues(build_wigner(b, WignerMode::symmetrized_average)), z);
      diff_re.push_back((sa - sb).real());
      diff_im.push_back((sa - sb).imag());
    }
    gaps.push_back(std::hypot(stats::mean(diff_re), stats::mean(diff_im)));
    ses.push_back(std::hypot(stats::std_dev(diff_re), stats::std_dev(diff_im)) / std::sqrt(double(reps)));
  }
  EXPECT_LE(gaps[1], gaps[0] + 2.0 * std::hypot(ses[0], ses[1]));
}

TEST(BlockingPlan, Counts) {
  const BlockingPlan plan{3, 1, 1.0};
  EXPECT_EQ(plan.block_count(12), 2);  // floor(12 / 4) - 1
  EXPECT_EQ(plan.remainder(12), 1);    // 12 - 2 * 4 - 3
  EXPECT_NO_THROW(plan.validate(12));
  const auto d = BlockingPlan::defaults(1000, 2);
  EXPECT_EQ(d.block, 10);
  EXPECT_NEAR(d.tau, std::pow(1000.0, -0.25), 1e-15);
}

TEST(BlockingPlan, DegeneratePlansRejected) {
  EXPECT_THROW((BlockingPlan{12, 0, 1.0}.validate(12)), PlanError);
  EXPECT_THROW((BlockingPlan{2, 2, 1.0}.validate(30)), PlanError);
  EXPECT_THROW((BlockingPlan{3, -1, 1.0}.validate(30)), PlanError);
  EXPECT_THROW((BlockingPlan{3, 1, 0.0}.validate(30)), PlanError);
}

TEST(Lindeberg, InfiniteTauKeepsTheMatrix) {
  std::mt19937_64 rng(8);
  auto p = integer_patch(rng, 12, 12);
  const auto w = build_wigner(p, WignerMode::lower_triangle);
  const auto r = lindeberg_decomposition_check(w, {3, 1, std::numeric_limits<double>::infinity()}, {0.0, 1.0});
  EXPECT_EQ(r.truncated, w.entries);
  EXPECT_EQ(r.truncated_mean, 0.0);
}

TEST(Lindeberg, ExactRankOnIntegerInstance) {
  std::mt19937_64 rng(9);
  auto p = integer_patch(rng, 12, 12);
  p.values = (p.values + p.values.transpose()).eval();
  const auto w = SymmetricEnsemble::from_matrix(p.values);
  const BlockingPlan plan{3, 1, std::numeric_limits<double>::infinity()};
  const auto r = lindeberg_decomposition_check(w, plan, {0.0, 1.0});
  const Eigen::MatrixXd d = r.blanked - r.blocked;
  std::vector<std::vector<long long>> rows(12, std::vector<long long>(12));
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) rows[i][j] = std::llround(d(i, j));
  }
  const int exact = oracle::bareiss_rank(rows);
  EXPECT_EQ(r.rank_difference, exact);
  EXPECT_LE(exact, 2 * (plan.block_count(12) * 1 + plan.remainder(12)));
  EXPECT_EQ(r.rank_bound, 2 * (2 * 1 + 1));
}

TEST(Lindeberg, BoundsHoldOnRandomFields) {
  int checked = 0;
  for (const auto& [name, model] : corpus::models()) {
    for (int n : {30, 60}) {
      const auto x = sample_field(model, n, n, 70 + n);
      const auto w = build_wigner(x, WignerMode::lower_triangle);
      const int k = std::min(dependence_range(model), 3);
      const auto plan = BlockingPlan{std::max(k + 1, n / 10), k, std::pow(n, -0.25)};
      BlockingReport r;
      ASSERT_NO_THROW(r = lindeberg_decomposition_check(w, plan, {0.3, 0.5})) << name;
      EXPECT_LE(r.rank_difference, r.rank_bound);
      EXPECT_LE(r.trace_gap_squared, r.trace_bound + 1e-12);
      EXPECT_LE(r.rank_gap, r.rank_gap_bound + 1e-12);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 2 * static_cast<int>(corpus::models().size()));
}

TEST(Lindeberg, TruncationCentersClippedEntries) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, 12);
  m(5, 2) = m(2, 5) = 10.0;
  const auto r = lindeberg_decomposition_check(SymmetricEnsemble::from_matrix(m), {3, 1, 1.0}, {0.0, 1.0});
  EXPECT_NEAR(r.truncated_mean, -10.0 / 78.0, 1e-15);
  EXPECT_NEAR(r.truncated(5, 2), 10.0 / 78.0, 1e-15);
  const auto r2 = lindeberg_decomposition_check(SymmetricEnsemble::from_matrix(m), {3, 1, 1.0}, {0.0, 1.0}, 0.0);
  EXPECT_EQ(r2.truncated(5, 2), 0.0);
}

TEST(SymmetricRank, KnownRanks) {
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  EXPECT_EQ(symmetric_rank(v * v.transpose()), 1);
  EXPECT_EQ(symmetric_rank(Eigen::MatrixXd::Identity(5, 5)), 5);
  EXPECT_EQ(symmetric_rank(Eigen::MatrixXd::Zero(3, 3)), 0);
}
