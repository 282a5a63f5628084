#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace orec {

/// Symbol ((|x_1|^theta + ... + |x_d|^theta)^(2/theta))^(eta/2).
struct LaplacePower {
  double theta;
  double eta;
};

/// Symbol (i x)^alpha = prod_j (i x_j)^alpha_j.
struct MixedDerivative {
  std::vector<double> alpha;
};

/// A positively homogeneous Fourier symbol on R^d.
class OperatorSymbol {
 public:
  using Kind = std::variant<LaplacePower, MixedDerivative>;

  static OperatorSymbol laplace_power(std::size_t d, double theta, double eta);
  static OperatorSymbol mixed_derivative(std::vector<double> alpha);

  std::size_t dimension() const noexcept { return d_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_laplace_power() const noexcept { return std::holds_alternative<LaplacePower>(kind_); }
  const LaplacePower& laplace() const { return std::get<LaplacePower>(kind_); }
  const MixedDerivative& mixed() const { return std::get<MixedDerivative>(kind_); }

  /// Homogeneity degree of |sigma|: eta, or |alpha|.
  double degree() const noexcept;

  bool operator==(const OperatorSymbol&) const = default;

 private:
  OperatorSymbol(std::size_t d, Kind kind) : d_(d), kind_(std::move(kind)) {}
  std::size_t d_;
  Kind kind_;
};

inline bool operator==(const LaplacePower& a, const LaplacePower& b) {
  return a.theta == b.theta && a.eta == b.eta;
}
inline bool operator==(const MixedDerivative& a, const MixedDerivative& b) {
  return a.alpha == b.alpha;
}

double symbol_magnitude(const OperatorSymbol& op, std::span<const double> xi);

/// Unit-modulus phase of the multiplier (principal branch of (i x_j)^alpha_j).
std::complex<double> multiplier_phase(const OperatorSymbol& op, std::span<const double> xi);

/// magnitude * phase
std::complex<double> symbol_value(const OperatorSymbol& op, std::span<const double> xi);

// Spherical coordinates: omega_1..omega_{d-2} in [0, pi], omega_{d-1} in [0, 2 pi].

std::vector<double> spherical_point(std::span<const double> omega, std::size_t d);

/// prod_{k=1}^{d-2} sin^{d-1-k}(omega_k); surface measure density on S^{d-1}.
double spherical_jacobian(std::span<const double> omega, std::size_t d);

/// |sigma| restricted to the unit sphere at omega.
double spherical_restriction(const OperatorSymbol& op, std::span<const double> omega);

}  // namespace orec
