#pragma once

#include <complex>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "orec/constants.hpp"
#include "orec/problem.hpp"

namespace orec {

// Rules for the factor a(xi) of a p = 2 family member m(y) = F^{-1}(a sigma_t y).

/// a = (2pi)^d l1 / ((2pi)^d l1 + l2 psi_c)
struct Canonical {};

/// a identically equal to `value`.
struct Constant {
  std::complex<double> value;
};

/// Point of the admissible disc at xi nearest to the constant c.
struct Clipped {
  double c;
};

struct ADescriptor;

/// w * canonical + (1 - w) * other
struct Convex {
  double w;
  std::shared_ptr<const ADescriptor> other;
};

/// Tabulated a: nearest direction, then linear interpolation in log |xi|
/// (clamped at the ends). Row-major values: directions x log_radii.
struct UserTable {
  std::vector<std::vector<double>> directions;
  std::vector<double> log_radii;
  std::vector<std::complex<double>> values;
};

struct ADescriptor {
  std::variant<Canonical, Constant, Clipped, Convex, UserTable> rule;
};

struct ThresholdFilter {
  double beta;
};

struct FamilyFilter {
  ADescriptor a;
  double lambda1;
  double lambda2;
};

/// A recovery method given by a Fourier multiplier.
struct FilterMethod {
  ProblemSpec spec;
  std::variant<ThresholdFilter, FamilyFilter> kind;

  bool is_family() const noexcept { return std::holds_alternative<FamilyFilter>(kind); }
};

/// Default optimal method of the spec's regime (threshold for p > 2,
/// canonical family member for p = 2).
FilterMethod build_method(const ProblemSpec& spec, const QuadratureOptions& options = {});

/// p = 2 family member with the given a-rule.
FilterMethod family_method(const ProblemSpec& spec, ADescriptor a);

/// The factor a(xi); for the threshold filter (1 - beta psi_c/psi_t)_+.
std::complex<double> a_value(const FilterMethod& m, std::span<const double> xi);

/// a(xi) * sigma_target(xi), phase included.
std::complex<double> multiplier_value(const FilterMethod& m, std::span<const double> xi);

/// Family condition S(xi); family methods only.
double s_value(const FilterMethod& m, std::span<const double> xi);

struct ProbeGrid {
  std::vector<double> radii;                    ///< Euclidean
  std::vector<std::vector<double>> directions;  ///< unit vectors
};

/// Log-radial x spherical grid around the stationary frequency, spanning
/// 10^-6 .. 10^6 times its norm. The stationary direction and radius are nodes.
ProbeGrid make_probe_grid(const ProblemSpec& spec, std::size_t per_decade = 40,
                          std::size_t angular = 64);

struct ValidationReport {
  double sup_s;
  std::vector<double> argmax_xi;
  bool pass;
};

ValidationReport validate_family(const FilterMethod& m, const ProbeGrid& grid);

/// f(rho) = (2pi)^d l1 + l2 rho^{2nu} d^{2nu(1/mu - 1/theta)} - rho^{2eta};
/// nonnegative with a double root at rho_0 (Laplace-target regime).
double radial_margin(const ProblemSpec& spec, double rho);

/// H(t) = -1 + (2pi)^d l1 e^{-2(alpha,t)} + l2 (sum_j e^{mu t_j - mu/nu (alpha,t)})^{2nu/mu};
/// convex, zero with zero gradient at log of the stationary frequency.
double log_margin(const ProblemSpec& spec, std::span<const double> t);

/// Radius (Euclidean) outside of which the threshold multiplier vanishes.
double threshold_support_radius(const FilterMethod& m);

}  // namespace orec
