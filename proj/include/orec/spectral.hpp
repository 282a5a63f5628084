#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "orec/filters.hpp"
#include "orec/problem.hpp"

namespace orec {

/// Uniform axis centered at the origin: coordinate(k) = (k - (n-1)/2) * step.
/// Even n keeps the origin off the grid.
struct Axis {
  std::size_t n = 2;
  double step = 1.0;

  double coordinate(std::size_t k) const {
    return (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1)) * step;
  }
  bool operator==(const Axis&) const = default;
};

/// Row-major product grid (last axis fastest).
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  std::size_t dimension() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  /// Riemann weight, product of steps.
  double weight() const noexcept { return weight_; }

  void point(std::size_t flat, std::span<double> out) const;
  std::vector<double> point(std::size_t flat) const;
  /// Flat index of the cell nearest to xi (clamped to the grid).
  std::size_t nearest(std::span<const double> xi) const;

  bool operator==(const Grid& o) const { return axes_ == o.axes_; }

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
  double weight_ = 0.0;
};

/// Samples of Fx (or y) on a frequency grid.
struct SpectralField {
  Grid grid;
  std::vector<std::complex<double>> values;
};

/// Samples of x on the reciprocal physical grid.
struct PhysicalField {
  Grid grid;
  std::vector<std::complex<double>> values;
};

template <typename F>
SpectralField sample_field(const Grid& grid, F&& f) {
  SpectralField out{grid, std::vector<std::complex<double>>(grid.size())};
  std::vector<double> xi(grid.dimension());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, xi);
    out.values[i] = f(std::span<const double>(xi));
  }
  return out;
}

/// Grid resolving the action region of the spec's method: half-width
/// max(4 rho_0, 8 |stationary component|) for p = 2, 1.5 x the threshold
/// support radius for p > 2. Points per axis default to 256 (d <= 2), 64 (d = 3), 16.
Grid default_grid(const ProblemSpec& spec, std::optional<std::size_t> points = std::nullopt);

/// sqrt((2pi)^-d sum w |sigma|^2 |F|^2), sigma = 1 when no symbol is given.
double weighted_l2(const SpectralField& field, const OperatorSymbol* weight = nullptr);

/// (sum w |F|^p)^{1/p}; max |F| for p = inf.
double lp_norm(const SpectralField& field, double p);

SpectralField apply_method(const FilterMethod& m, const SpectralField& y);

struct RandomNoise {};

/// All noise mass in the cell containing xi. The phase follows `reference`
/// when given, otherwise it makes the error term a z add coherently to (1 - a) Fx.
struct AdversarialAt {
  std::vector<double> xi;
  std::optional<std::complex<double>> reference;
};

using NoiseMode = std::variant<RandomNoise, AdversarialAt>;

/// field + z with lp_norm(z, p) = delta. `method` is used for phase alignment
/// in adversarial mode.
SpectralField add_noise(const SpectralField& field, double delta, double p, const NoiseMode& mode,
                        std::uint64_t seed, const FilterMethod* method = nullptr);

/// x(t_j) = (2pi)^-d sum_k F_k e^{i <t_j, xi_k>} w, on the grid with steps 2pi/(n h).
PhysicalField inverse_transform(const SpectralField& field);

/// F_k = sum_j x_j e^{-i <t_j, xi_k>} w_t; exact inverse of inverse_transform.
SpectralField forward_transform(const PhysicalField& field);

}  // namespace orec
