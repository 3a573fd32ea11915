#pragma once

// Finite windows of stationary random fields on the integer lattice Z^2:
// i.i.d. innovations, linear filters, second-order Volterra expansions and
// centered Gaussian fields with a prescribed covariance function.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace corrspec {

class CovarianceFunction;

/// A point (row, col) of Z^2; also used for lags and filter offsets.
struct Offset {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Offset&, const Offset&) = default;
  friend Offset operator+(Offset a, Offset b) { return {a.row + b.row, a.col + b.col}; }
  friend Offset operator-(Offset a, Offset b) { return {a.row - b.row, a.col - b.col}; }
  friend Offset operator-(Offset a) { return {-a.row, -a.col}; }
};

/// Inclusive bounding box of a set of offsets.
struct BoundingBox {
  Offset lo;
  Offset hi;

  int diameter() const { return std::max(hi.row - lo.row, hi.col - lo.col); }
  int radius() const;  // max |component| over the corners
};

enum class InnovationLaw { standard_gaussian, rademacher, centered_uniform };

std::string_view to_string(InnovationLaw law);
InnovationLaw innovation_law_from_string(std::string_view name);

/// Law of the i.i.d. array xi_{i,j}; every law is centered and scaled to `variance`.
struct InnovationSpec {
  InnovationLaw law = InnovationLaw::standard_gaussian;
  double variance = 1.0;

  void validate() const;
};

/// Coefficients a_{k,l} of X_{i,j} = sum a_{k,l} xi_{k+i, l+j}.
struct LinearCoefficients {
  std::map<Offset, double> values;

  BoundingBox bounds() const;  // throws ModelError when empty
  friend bool operator==(const LinearCoefficients&, const LinearCoefficients&) = default;
};

/// Coefficients of X_k = sum_u a_u xi_{k-u} + sum_{u,v} b_{u,v} xi_{k-u} xi_{k-v}; b_{u,u} must vanish.
struct VolterraCoefficients {
  std::map<Offset, double> linear;
  std::map<std::pair<Offset, Offset>, double> quadratic;

  void validate() const;       // throws ModelError on a nonzero diagonal b_{u,u}
  BoundingBox bounds() const;  // over every offset in a and b; throws ModelError when both are empty
  friend bool operator==(const VolterraCoefficients&, const VolterraCoefficients&) = default;
};

/// A rows x cols window of a field whose top-left site is `origin`.
struct FieldPatch {
  Offset origin;
  Eigen::MatrixXd values;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Half-width m of the innovation window [-m, m]^2 used by the m-dependent approximation.
struct WindowParameter {
  int m = 0;
};

/// Draws xi on the window with top-left `origin`. Values depend only on (spec, seed, site).
FieldPatch sample_innovations(const InnovationSpec& spec, Offset origin, int rows, int cols,
                              std::uint64_t seed);
FieldPatch sample_innovations(const InnovationSpec& spec, int rows, int cols, std::uint64_t seed);

FieldPatch sample_linear_field(const LinearCoefficients& coeffs, const InnovationSpec& spec, Offset origin,
                               int rows, int cols, std::uint64_t seed);
FieldPatch sample_linear_field(const LinearCoefficients& coeffs, const InnovationSpec& spec, int rows, int cols,
                               std::uint64_t seed);

FieldPatch sample_volterra_field(const VolterraCoefficients& coeffs, const InnovationSpec& spec, Offset origin,
                                 int rows, int cols, std::uint64_t seed);
FieldPatch sample_volterra_field(const VolterraCoefficients& coeffs, const InnovationSpec& spec, int rows,
                                 int cols, std::uint64_t seed);

/// Conditional expectation on the innovation window [-m, m]^2. For these model
/// classes it is coefficient truncation; the result is 2m-dependent.
LinearCoefficients truncate_to_window(const LinearCoefficients& coeffs, WindowParameter window);
VolterraCoefficients truncate_to_window(const VolterraCoefficients& coeffs, WindowParameter window);

/// Stationary centered Gaussian field with covariance `gamma`, synthesized by 2-D
/// circulant embedding. Throws EmbeddingError when the embedded spectrum is
/// negative beyond 1e-10 * max eigenvalue.
FieldPatch sample_gaussian_matched_field(const CovarianceFunction& gamma, int rows, int cols, std::uint64_t seed);

namespace detail {
/// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
int next_fft_size(int n);
}  // namespace detail

}  // namespace corrspec
