#include "corrspec/models.hpp"

namespace corrspec {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

}  // namespace

std::string model_name(const FieldModel& model) {
  return std::visit(overloaded{
                        [](const IidModel&) { return std::string("iid"); },
                        [](const LinearModel&) { return std::string("linear"); },
                        [](const VolterraModel&) { return std::string("volterra"); },
                        [](const GaussianMatchedModel&) { return std::string("gaussian_matched"); },
                    },
                    model);
}

FieldPatch sample_field(const FieldModel& model, int rows, int cols, std::uint64_t seed) {
  return std::visit(overloaded{
                        [&](const IidModel& m) { return sample_innovations(m.innovations, rows, cols, seed); },
                        [&](const LinearModel& m) {
                          return sample_linear_field(m.coeffs, m.innovations, rows, cols, seed);
                        },
                        [&](const VolterraModel& m) {
                          return sample_volterra_field(m.coeffs, m.innovations, rows, cols, seed);
                        },
                        [&](const GaussianMatchedModel& m) {
                          return sample_gaussian_matched_field(m.gamma, rows, cols, seed);
                        },
                    },
                    model);
}

CovarianceFunction analytic_gamma(const FieldModel& model) {
  return std::visit(overloaded{
                        [](const IidModel& m) {
                          CovarianceFunction g(0);
                          g.set(0, 0, m.innovations.variance);
                          return g;
                        },
                        [](const LinearModel& m) { return gamma_from_linear(m.coeffs, m.innovations.variance); },
                        [](const VolterraModel& m) { return gamma_from_volterra(m.coeffs, m.innovations.variance); },
                        [](const GaussianMatchedModel& m) { return m.gamma; },
                    },
                    model);
}

int dependence_range(const FieldModel& model) {
  return std::visit(overloaded{
                        [](const IidModel&) { return 0; },
                        [](const LinearModel& m) { return m.coeffs.bounds().diameter(); },
                        [](const VolterraModel& m) { return m.coeffs.bounds().diameter(); },
                        // Uncorrelated jointly Gaussian sites are independent.
                        [](const GaussianMatchedModel& m) { return m.gamma.radius(); },
                    },
                    model);
}

}  // namespace corrspec
