#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "orec/problem.hpp"

namespace orec {

struct Exponents {
  double gamma;
  double q_star;
};

/// gamma = (nu - kappa)/(nu + d(1/2 - 1/p)), q* = 1/(gamma (1/2 - 1/p)); p > 2.
Exponents gamma_qstar(const ProblemSpec& spec);

/// Euler beta function via log-gamma.
double beta_fn(double a, double b);

/// Sharp-constant factor C_p(nu, kappa) for 2 < p <= inf.
double cp_constant(double nu, double kappa, double p, std::size_t d);

struct QuadratureOptions {
  std::size_t initial_nodes = 8;    ///< Gauss-Legendre nodes per panel
  double tolerance = 1e-10;         ///< relative change between doublings
  std::size_t max_points = 40'000'000;
};

struct QuadratureResult {
  double value;
  std::size_t nodes_per_panel;
  double last_change;
};

/// Integral over [0,pi]^{d-2} x [0,2pi] of f(t(omega)) J(omega), where t is the
/// unit vector at omega. Panels are split at multiples of pi/2 (the zero set
/// of the coordinates) and each panel uses Gauss-Legendre in a sigmoidal
/// variable. For d = 1 returns f(-1) + f(+1).
QuadratureResult spherical_integral(std::size_t d,
                                    const std::function<double(std::span<const double>)>& f,
                                    const QuadratureOptions& options = {});

/// The spherical integral I entering the p > 2 closed form.
double integral_i(const ProblemSpec& spec, const QuadratureOptions& options = {});

struct RecoveryConstants {
  Regime regime;
  double gamma;                  ///< exponent of delta in the error
  std::optional<double> q_star;  ///< p > 2 only
  std::optional<double> cp;
  std::optional<double> integral_i;
  double error;                  ///< optimal recovery error E
  double inequality_constant;    ///< E / delta^gamma
  std::optional<double> beta;    ///< threshold parameter, p > 2
  std::optional<double> lambda1;  ///< p = 2
  std::optional<double> lambda2;
};

RecoveryConstants optimal_error(const ProblemSpec& spec, const QuadratureOptions& options = {});

struct StationaryPoint {
  /// Laplace target: theta-norm rho_0 of `frequency`. Mixed derivative: its Euclidean norm.
  double radius;
  /// Frequency where the canonical family member has S = 1.
  std::vector<double> frequency;
};

/// p = 2 only.
StationaryPoint stationary_point(const ProblemSpec& spec);

/// Largest admissible bump radius: min over active components of the
/// stationary frequency.
double bump_admissibility_bound(const ProblemSpec& spec);

}  // namespace orec
