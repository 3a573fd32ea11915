#pragma once

// A field model as one value: what to sample, its analytic covariance and its
// dependence range.

#include <cstdint>
#include <string>
#include <variant>

#include "corrspec/covariance_kernel.hpp"
#include "corrspec/field_models.hpp"

namespace corrspec {

struct IidModel {
  InnovationSpec innovations;
};

struct LinearModel {
  LinearCoefficients coeffs;
  InnovationSpec innovations;
};

struct VolterraModel {
  VolterraCoefficients coeffs;
  InnovationSpec innovations;
};

struct GaussianMatchedModel {
  CovarianceFunction gamma;
};

using FieldModel = std::variant<IidModel, LinearModel, VolterraModel, GaussianMatchedModel>;

std::string model_name(const FieldModel& model);

FieldPatch sample_field(const FieldModel& model, int rows, int cols, std::uint64_t seed);

/// gamma_{k,l} = E(X_{0,0} X_{k,l}) in closed form.
CovarianceFunction analytic_gamma(const FieldModel& model);

/// Smallest K such that sites further apart than K (max-norm) are independent.
int dependence_range(const FieldModel& model);

}  // namespace corrspec
