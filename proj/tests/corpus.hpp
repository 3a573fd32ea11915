#pragma once

// Field models shared by the unit tests and the acceptance run.

#include <string>
#include <utility>
#include <vector>

#include "corrspec/models.hpp"

namespace corpus {

using namespace corrspec;

/// a_{k,l} = a_k a_l from a 1-D filter indexed from -radius.
inline LinearCoefficients separable_linear(const std::vector<double>& a) {
  const int radius = static_cast<int>(a.size()) / 2;
  LinearCoefficients c;
  for (int k = -radius; k <= radius; ++k) {
    for (int l = -radius; l <= radius; ++l) {
      const double v = a[static_cast<std::size_t>(k + radius)] * a[static_cast<std::size_t>(l + radius)];
      if (v != 0.0) c.values[{k, l}] = v;
    }
  }
  return c;
}

inline LinearModel white_linear(InnovationLaw law) {
  LinearModel m;
  m.coeffs.values[{0, 0}] = 1.0;
  m.innovations = {law, 1.0};
  return m;
}

/// a_{0,0} = 1, a_{1,0} = 1/2: gamma_{1,0} = 1/2 but gamma_{0,1} = 0.
inline LinearModel one_sided_linear() {
  LinearModel m;
  m.coeffs.values[{0, 0}] = 1.0;
  m.coeffs.values[{1, 0}] = 0.5;
  return m;
}

/// b_{(0,0),(1,0)} = 1 and nothing else.
inline VolterraModel single_quadratic(InnovationLaw law) {
  VolterraModel m;
  m.coeffs.quadratic[{Offset{0, 0}, Offset{1, 0}}] = 1.0;
  m.innovations = {law, 1.0};
  return m;
}

inline std::vector<std::pair<std::string, FieldModel>> models() {
  std::vector<std::pair<std::string, FieldModel>> out;
  out.emplace_back("iid gaussian", IidModel{{InnovationLaw::standard_gaussian, 1.0}});
  out.emplace_back("iid uniform variance 2", IidModel{{InnovationLaw::centered_uniform, 2.0}});
  out.emplace_back("white linear", white_linear(InnovationLaw::rademacher));
  out.emplace_back("one-sided linear", one_sided_linear());
  out.emplace_back("separable linear 1/4 1 1/4",
                   LinearModel{separable_linear({0.25, 1.0, 0.25}), {InnovationLaw::rademacher, 1.0}});
  out.emplace_back("separable linear radius 2",
                   LinearModel{separable_linear({0.25, 0.5, 1.0, 0.5, 0.25}), {InnovationLaw::standard_gaussian, 1.0}});

  LinearModel skew;
  skew.coeffs.values = {{{0, 0}, 1.0}, {{1, -1}, -0.4}, {{-2, 1}, 0.3}, {{2, 2}, 0.15}, {{0, 3}, -0.2}};
  skew.innovations = {InnovationLaw::centered_uniform, 1.5};
  out.emplace_back("irregular linear", skew);

  out.emplace_back("single quadratic volterra", single_quadratic(InnovationLaw::standard_gaussian));

  VolterraModel mixed;
  mixed.coeffs.linear = {{{0, 0}, 1.0}, {{0, 1}, 0.5}};
  mixed.coeffs.quadratic = {{{Offset{0, 0}, Offset{1, 1}}, 0.6}, {{Offset{-1, 0}, Offset{0, 2}}, -0.3}};
  mixed.innovations = {InnovationLaw::rademacher, 1.0};
  out.emplace_back("mixed volterra", mixed);

  CovarianceFunction g(1);
  g.set(0, 0, 1.0);
  g.set(1, 0, 0.25);
  g.set(0, 1, 0.25);
  g.set(1, 1, 0.1);
  g.set(1, -1, 0.1);
  out.emplace_back("gaussian matched", GaussianMatchedModel{g});
  return out;
}

}  // namespace corpus
