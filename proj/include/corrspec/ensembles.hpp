#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "corrspec/field_models.hpp"

namespace corrspec {

/// Which scaling was applied when the matrix was built.
enum class Normalization {
  inverse_sqrt_n,  // n^{-1/2} X_n
  inverse_sqrt_p,  // Gram embedding, scaled by p^{-1/2}
  none,            // stored as given
};

struct Provenance {
  std::string model;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::inverse_sqrt_n;
};

/// Dense symmetric matrix of order n, normalization already applied.
struct SymmetricEnsemble {
  Eigen::MatrixXd entries;
  Provenance provenance;

  int order() const { return static_cast<int>(entries.rows()); }
  /// Wraps a matrix as-is; throws DimensionError unless square and bitwise symmetric.
  static SymmetricEnsemble from_matrix(Eigen::MatrixXd m, Provenance provenance = {"", 0, Normalization::none});
};

/// B_N = p^{-1} X X^T for an N x p data matrix X.
struct GramEnsemble {
  int rows = 0;     // N
  int samples = 0;  // p
  Eigen::MatrixXd matrix;
  Provenance provenance;

  double aspect() const { return static_cast<double>(rows) / samples; }
};

enum class WignerMode { lower_triangle, symmetrized_average };

/// lower_triangle mirrors patch(i, j), j <= i; symmetrized_average uses (P_{kl} + P_{lk}) / sqrt 2.
/// Both divide by sqrt n. Throws DimensionError on a non-square patch.
SymmetricEnsemble build_wigner(const FieldPatch& patch, WignerMode mode);
GramEnsemble build_gram(const FieldPatch& patch);
/// Order N + p matrix p^{-1/2} [[0, X^T], [X, 0]]; the sqrt n normalization is not applied.
SymmetricEnsemble embed_gram_symmetric(const FieldPatch& patch);

/// Stieltjes transform of the Gram matrix obtained from that of its symmetric embedding:
/// S_B(z) = z^{-1/2} (n / 2N) S_X(z^{1/2}) + (p - N) / (2 N z).
std::complex<double> gram_stieltjes_from_embedding(std::complex<double> s_embedding_at_sqrt_z, int rows, int samples,
                                                   std::complex<double> z);

/// Block decomposition with big blocks of side p separated by gaps of width K.
struct BlockingPlan {
  int block = 0;        // p
  int gap = 0;          // K
  double tau = 0.0;     // truncation level on normalized entries; +inf disables truncation

  int block_count(int n) const;  // q = floor(n / (p + K)) - 1
  int remainder(int n) const;    // m = n - q (p + K) - p
  /// Throws PlanError unless p > K >= 0, p + K <= n / 3 and q >= 1.
  void validate(int n) const;
  /// tau = n^{-1/4}, p = floor(n^{1/3}).
  static BlockingPlan defaults(int n, int gap);
};

struct BlockingReport {
  int order = 0;
  int block_count = 0;  // q
  int remainder = 0;    // m
  Eigen::MatrixXd truncated;  // X-bar
  Eigen::MatrixXd blanked;    // X-hat
  Eigen::MatrixXd blocked;    // X-tilde
  double truncated_mean = 0.0;
  int rank_difference = 0;  // rank(X-hat - X-tilde)
  int rank_bound = 0;       // 2 (q K + m)
  double trace_gap_squared = 0.0;  // |S_{X-bar} - S_{X-hat}|^2
  double trace_bound = 0.0;
  double rank_gap = 0.0;           // |S_{X-hat} - S_{X-tilde}|
  double rank_gap_bound = 0.0;     // pi rank / (v n)
};

/// Builds the truncated, diagonal-blanked and blocked matrices of the block
/// Lindeberg construction and checks its deterministic bounds; throws
/// BoundViolation if any fails. Without `truncated_mean`, the centering constant
/// E(X 1{|X| <= tau}) is estimated as minus the mean of the clipped entries.
BlockingReport lindeberg_decomposition_check(const SymmetricEnsemble& ensemble, const BlockingPlan& plan,
                                             std::complex<double> z,
                                             std::optional<double> truncated_mean = std::nullopt);

/// Numerical rank of a symmetric matrix from its eigenvalues.
int symmetric_rank(const Eigen::MatrixXd& m);

}  // namespace corrspec
