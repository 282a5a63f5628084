#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "orec/symbols.hpp"

namespace orec {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Recover target x from y with ||Fx - y||_p <= delta, x in
/// { ||constraint x||_{L2} <= 1 }, error measured in L2.
struct ProblemSpec {
  std::size_t d = 1;
  double p = 2.0;  ///< 2, or in (2, inf]
  double delta = 1.0;
  OperatorSymbol target = OperatorSymbol::laplace_power(1, 2.0, 1.0);
  OperatorSymbol constraint = OperatorSymbol::laplace_power(1, 2.0, 2.0);

  double mu() const { return constraint.laplace().theta; }
  double nu() const { return constraint.laplace().eta; }
  double kappa() const { return target.degree(); }
};

enum class Regime {
  Threshold,     ///< 2 < p <= inf, threshold filter
  LaplaceL2,     ///< p = 2, generalized Laplace power target
  DerivativeL2,  ///< p = 2, mixed derivative target
};

std::string to_string(Regime r);

/// Validates the spec and picks the closed form; throws RegimeError naming
/// the violated hypothesis.
Regime classify(const ProblemSpec& spec);

}  // namespace orec
