#include "corrspec/field_models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "corrspec/covariance_kernel.hpp"
#include "corrspec/errors.hpp"
#include "corrspec/random.hpp"
#include "fft.hpp"

namespace corrspec {

namespace {

constexpr std::uint64_t kInnovationStream = 0;
constexpr std::uint64_t kSynthesisStream = 1;

void require_shape(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("field patch needs positive dimensions, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

double innovation_at(const InnovationSpec& spec, std::uint64_t seed, int row, int col) {
  const std::uint64_t key = rng::site_key(seed, kInnovationStream, row, col);
  const double scale = std::sqrt(spec.variance);
  switch (spec.law) {
    case InnovationLaw::standard_gaussian:
      return scale * rng::standard_normal(key);
    case InnovationLaw::rademacher:
      return (rng::splitmix64(key) >> 63) ? scale : -scale;
    case InnovationLaw::centered_uniform:
      return scale * std::sqrt(3.0) * (2.0 * rng::uniform_open(rng::splitmix64(key)) - 1.0);
  }
  return 0.0;
}

void extend(BoundingBox& box, Offset o) {
  box.lo.row = std::min(box.lo.row, o.row);
  box.lo.col = std::min(box.lo.col, o.col);
  box.hi.row = std::max(box.hi.row, o.row);
  box.hi.col = std::max(box.hi.col, o.col);
}

bool inside_window(Offset o, int m) { return std::abs(o.row) <= m && std::abs(o.col) <= m; }

}  // namespace

int BoundingBox::radius() const {
  return std::max({std::abs(lo.row), std::abs(lo.col), std::abs(hi.row), std::abs(hi.col)});
}

std::string_view to_string(InnovationLaw law) {
  switch (law) {
    case InnovationLaw::standard_gaussian:
      return "standard_gaussian";
    case InnovationLaw::rademacher:
      return "rademacher";
    case InnovationLaw::centered_uniform:
      return "centered_uniform";
  }
  return "unknown";
}

InnovationLaw innovation_law_from_string(std::string_view name) {
  if (name == "standard_gaussian" || name == "gaussian") return InnovationLaw::standard_gaussian;
  if (name == "rademacher") return InnovationLaw::rademacher;
  if (name == "centered_uniform" || name == "uniform") return InnovationLaw::centered_uniform;
  throw ModelError("unknown innovation distribution '" + std::string(name) + "'");
}

void InnovationSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ModelError("innovation variance must be positive and finite");
  }
}

BoundingBox LinearCoefficients::bounds() const {
  if (values.empty()) throw ModelError("linear filter has empty support");
  BoundingBox box{values.begin()->first, values.begin()->first};
  for (const auto& [o, a] : values) extend(box, o);
  return box;
}

void VolterraCoefficients::validate() const {
  for (const auto& [uv, b] : quadratic) {
    if (uv.first == uv.second && b != 0.0) {
      throw ModelError("Volterra quadratic coefficient b_{u,u} must vanish (u = (" + std::to_string(uv.first.row) +
                       "," + std::to_string(uv.first.col) + "))");
    }
  }
}

BoundingBox VolterraCoefficients::bounds() const {
  if (linear.empty() && quadratic.empty()) throw ModelError("Volterra model has empty support");
  const Offset seed = linear.empty() ? quadratic.begin()->first.first : linear.begin()->first;
  BoundingBox box{seed, seed};
  for (const auto& [u, a] : linear) extend(box, u);
  for (const auto& [uv, b] : quadratic) {
    extend(box, uv.first);
    extend(box, uv.second);
  }
  return box;
}

FieldPatch sample_innovations(const InnovationSpec& spec, Offset origin, int rows, int cols, std::uint64_t seed) {
  require_shape(rows, cols);
  spec.validate();
  FieldPatch patch{origin, Eigen::MatrixXd(rows, cols)};
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      patch.values(i, j) = innovation_at(spec, seed, origin.row + i, origin.col + j);
    }
  }
  return patch;
}

FieldPatch sample_innovations(const InnovationSpec& spec, int rows, int cols, std::uint64_t seed) {
  return sample_innovations(spec, Offset{}, rows, cols, seed);
}

FieldPatch sample_linear_field(const LinearCoefficients& coeffs, const InnovationSpec& spec, Offset origin, int rows,
                               int cols, std::uint64_t seed) {
  require_shape(rows, cols);
  const BoundingBox box = coeffs.bounds();
  // X_{i,j} reads xi_{i+k, j+l}; the innovation window is the patch shifted by the support box.
  const Offset xi_origin = origin + box.lo;
  const FieldPatch xi = sample_innovations(spec, xi_origin, rows + box.hi.row - box.lo.row,
                                           cols + box.hi.col - box.lo.col, seed);
  FieldPatch out{origin, Eigen::MatrixXd::Zero(rows, cols)};
  for (const auto& [o, a] : coeffs.values) {
    if (a == 0.0) continue;
    out.values += a * xi.values.block(o.row - box.lo.row, o.col - box.lo.col, rows, cols);
  }
  return out;
}

FieldPatch sample_linear_field(const LinearCoefficients& coeffs, const InnovationSpec& spec, int rows, int cols,
                               std::uint64_t seed) {
  return sample_linear_field(coeffs, spec, Offset{}, rows, cols, seed);
}

FieldPatch sample_volterra_field(const VolterraCoefficients& coeffs, const InnovationSpec& spec, Offset origin,
                                 int rows, int cols, std::uint64_t seed) {
  require_shape(rows, cols);
  coeffs.validate();
  const BoundingBox box = coeffs.bounds();
  // X_k reads xi_{k-u}: rows from origin - hi to origin + rows - 1 - lo.
  const Offset xi_origin = origin - box.hi;
  const FieldPatch xi = sample_innovations(spec, xi_origin, rows + box.hi.row - box.lo.row,
                                           cols + box.hi.col - box.lo.col, seed);
  auto window = [&](Offset u) { return xi.values.block(box.hi.row - u.row, box.hi.col - u.col, rows, cols); };

  FieldPatch out{origin, Eigen::MatrixXd::Zero(rows, cols)};
  for (const auto& [u, a] : coeffs.linear) {
    if (a == 0.0) continue;
    out.values += a * window(u);
  }
  for (const auto& [uv, b] : coeffs.quadratic) {
    if (b == 0.0) continue;
    out.values.array() += b * window(uv.first).array() * window(uv.second).array();
  }
  return out;
}

FieldPatch sample_volterra_field(const VolterraCoefficients& coeffs, const InnovationSpec& spec, int rows, int cols,
                                 std::uint64_t seed) {
  return sample_volterra_field(coeffs, spec, Offset{}, rows, cols, seed);
}

LinearCoefficients truncate_to_window(const LinearCoefficients& coeffs, WindowParameter window) {
  if (window.m < 0) throw ModelError("window parameter m must be nonnegative");
  LinearCoefficients out;
  for (const auto& [o, a] : coeffs.values) {
    if (inside_window(o, window.m)) out.values.emplace(o, a);
  }
  return out;
}

VolterraCoefficients truncate_to_window(const VolterraCoefficients& coeffs, WindowParameter window) {
  if (window.m < 0) throw ModelError("window parameter m must be nonnegative");
  VolterraCoefficients out;
  for (const auto& [u, a] : coeffs.linear) {
    if (inside_window(u, window.m)) out.linear.emplace(u, a);
  }
  for (const auto& [uv, b] : coeffs.quadratic) {
    if (inside_window(uv.first, window.m) && inside_window(uv.second, window.m)) out.quadratic.emplace(uv, b);
  }
  return out;
}

namespace detail {

int next_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace detail

FieldPatch sample_gaussian_matched_field(const CovarianceFunction& gamma, int rows, int cols, std::uint64_t seed) {
  require_shape(rows, cols);
  gamma.validate();
  const int radius = gamma.radius();
  const int torus_rows = detail::next_fft_size(2 * (rows + radius));
  const int torus_cols = detail::next_fft_size(2 * (cols + radius));

  // Covariance wrapped onto the torus; no aliasing since torus side > 2 * radius.
  detail::Fft2d spectrum(torus_rows, torus_cols, FFTW_FORWARD);
  spectrum.fill(0.0);
  for (int k = -radius; k <= radius; ++k) {
    for (int l = -radius; l <= radius; ++l) {
      spectrum.at((k + torus_rows) % torus_rows, (l + torus_cols) % torus_cols) = gamma.at(k, l);
    }
  }
  spectrum.execute();

  double max_eig = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (int r = 0; r < torus_rows; ++r) {
    for (int c = 0; c < torus_cols; ++c) {
      const double v = spectrum.at(r, c).real();
      max_eig = std::max(max_eig, v);
      min_eig = std::min(min_eig, v);
    }
  }
  const double eps = 1e-10 * max_eig;
  if (min_eig < -eps) {
    throw EmbeddingError("circulant embedding has a negative eigenvalue " + std::to_string(min_eig), min_eig);
  }

  const double total = static_cast<double>(torus_rows) * static_cast<double>(torus_cols);
  detail::Fft2d synth(torus_rows, torus_cols, FFTW_FORWARD);
  for (int r = 0; r < torus_rows; ++r) {
    for (int c = 0; c < torus_cols; ++c) {
      const double lambda = std::max(spectrum.at(r, c).real(), 0.0);
      const double amp = std::sqrt(lambda / total);
      const std::uint64_t key = rng::site_key(seed, kSynthesisStream, r, c);
      const double re = rng::standard_normal(rng::splitmix64(key ^ 0xa5a5ULL));
      const double im = rng::standard_normal(rng::splitmix64(key ^ 0x5a5aULL));
      synth.at(r, c) = {amp * re, amp * im};
    }
  }
  synth.execute();

  FieldPatch out{Offset{}, Eigen::MatrixXd(rows, cols)};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out.values(i, j) = synth.at(i, j).real();
  }
  return out;
}

}  // namespace corrspec
