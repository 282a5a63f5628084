#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orec/filters.hpp"
#include "orec/spectral.hpp"

namespace orec {

/// Indicator of the ball B(center, epsilon) scaled to data norm delta
/// (times the constraint correction factor in the mixed-derivative regime).
struct BumpSpec {
  double epsilon;
  std::vector<double> center;
  double amplitude;  ///< continuous value: delta * factor / sqrt(vol B)
  double factor;     ///< 1 in the Laplace-target regime
  Regime normalization;
};

/// p = 2 only; epsilon must be in (0, bump_admissibility_bound].
BumpSpec bump_spec(const ProblemSpec& spec, double epsilon);

/// Rasterized bump renormalized so that lp_norm(field, 2) = delta * factor.
/// Requires at least 8 cells across the ball on every axis.
SpectralField bump_field(const ProblemSpec& spec, double epsilon, const Grid& grid);

/// eps_k = bound / 4 * 2^-k, k = 0..halvings.
std::vector<double> default_eps_sequence(const ProblemSpec& spec, int halvings = 5);

/// Grid with `cells_across` points across the smallest bump of the sequence.
Grid sweep_grid(const ProblemSpec& spec, std::span<const double> eps, double cells_across = 16.0);

struct SweepEntry {
  double eps;
  double ratio;
};

/// p = 2: ||Lambda x_eps|| / E for each bump. p > 2: inequality ratio of the
/// field delta * 1{psi_t > beta (1 + eps) psi_c}.
std::vector<SweepEntry> lower_bound_sweep(const ProblemSpec& spec, std::span<const double> eps,
                                          const Grid& grid);

/// Per-cell worst-case gains of a multiplier method: A per unit of constraint
/// budget, B per unit of data-error budget.
struct Gains {
  std::vector<double> a;
  std::vector<double> b;
};

Gains worst_case_gains(const FilterMethod& m, const Grid& grid);

struct DualResult {
  double worst_error;  ///< sqrt(rho + kappa delta^2); +inf if unbounded
  double rho;
  double kappa;
  std::optional<std::size_t> unbounded_at;
};

/// min rho + kappa delta^2 subject to A_i^2 / rho + B_i^2 / kappa <= 1.
DualResult worst_case_dual(std::span<const double> a, std::span<const double> b, double delta);
DualResult worst_case_dual(const FilterMethod& m, const Grid& grid);

struct Allocation {
  std::size_t index;
  double s;    ///< share of the constraint budget
  double tau;  ///< share of the data-error budget
};

struct PrimalResult {
  double worst_error;
  std::vector<Allocation> allocation;
};

/// Best one- or two-frequency allocation; the reported value is the
/// objective evaluated at the returned feasible allocation.
PrimalResult worst_case_primal(std::span<const double> a, std::span<const double> b, double delta,
                               std::uint64_t seed = 0);
PrimalResult worst_case_primal(const FilterMethod& m, const Grid& grid, std::uint64_t seed = 0);

struct SupNoiseResult {
  double worst_error;  ///< +inf if unbounded
  std::optional<std::vector<double>> offending_frequency;
};

/// Worst case under pointwise |z| <= delta on the grid.
SupNoiseResult worst_case_sup_noise(const FilterMethod& m, const Grid& grid);

struct InequalityResult {
  double lhs;
  double rhs;
  double ratio;  ///< 0 for the zero field
};

/// ||Lambda x|| against (E / delta^gamma) ||Fx||_p^gamma ||Dx||^(1-gamma).
InequalityResult sharp_inequality_check(const ProblemSpec& spec, const SpectralField& field);

}  // namespace orec
