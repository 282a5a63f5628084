#include "orec/symbols.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace orec {

namespace {

void check_dimension(const OperatorSymbol& op, std::span<const double> xi) {
  if (xi.size() != op.dimension())
    throw std::invalid_argument("frequency has length " + std::to_string(xi.size()) +
                                ", symbol dimension is " + std::to_string(op.dimension()));
}

}  // namespace

OperatorSymbol OperatorSymbol::laplace_power(std::size_t d, double theta, double eta) {
  if (d == 0) throw std::invalid_argument("dimension must be >= 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be > 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be >= 0");
  return OperatorSymbol(d, LaplacePower{theta, eta});
}

OperatorSymbol OperatorSymbol::mixed_derivative(std::vector<double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("dimension must be >= 1");
  for (double a : alpha)
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("alpha_j must be >= 0");
  const std::size_t d = alpha.size();
  return OperatorSymbol(d, MixedDerivative{std::move(alpha)});
}

double OperatorSymbol::degree() const noexcept {
  if (const auto* lp = std::get_if<LaplacePower>(&kind_)) return lp->eta;
  const auto& a = std::get<MixedDerivative>(kind_).alpha;
  return std::accumulate(a.begin(), a.end(), 0.0);
}

double symbol_magnitude(const OperatorSymbol& op, std::span<const double> xi) {
  check_dimension(op, xi);
  if (op.is_laplace_power()) {
    const auto [theta, eta] = op.laplace();
    if (eta == 0.0) return 1.0;
    double s = 0.0;
    if (theta == 2.0) {
      for (double x : xi) s += x * x;
    } else {
      for (double x : xi) s += std::pow(std::abs(x), theta);
    }
    return std::pow(s, eta / theta);
  }
  double m = 1.0;
  const auto& alpha = op.mixed().alpha;
  for (std::size_t j = 0; j < xi.size(); ++j)
    if (alpha[j] != 0.0) m *= std::pow(std::abs(xi[j]), alpha[j]);
  return m;
}

std::complex<double> multiplier_phase(const OperatorSymbol& op, std::span<const double> xi) {
  check_dimension(op, xi);
  if (op.is_laplace_power()) return 1.0;
  const auto& alpha = op.mixed().alpha;
  double angle = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) {
    if (alpha[j] == 0.0) continue;
    if (xi[j] == 0.0) return 1.0;  // multiplier vanishes
    angle += alpha[j] * (xi[j] > 0.0 ? 1.0 : -1.0);
  }
  return std::polar(1.0, angle * std::numbers::pi / 2.0);
}

std::complex<double> symbol_value(const OperatorSymbol& op, std::span<const double> xi) {
  return symbol_magnitude(op, xi) * multiplier_phase(op, xi);
}

std::vector<double> spherical_point(std::span<const double> omega, std::size_t d) {
  if (d < 2) throw std::invalid_argument("spherical coordinates need d >= 2");
  if (omega.size() != d - 1)
    throw std::invalid_argument("expected " + std::to_string(d - 1) + " angles");
  constexpr double pi = std::numbers::pi;
  for (std::size_t k = 0; k < d - 1; ++k) {
    const double hi = (k + 1 == d - 1) ? 2.0 * pi : pi;
    if (!(omega[k] >= 0.0 && omega[k] <= hi))
      throw std::invalid_argument("angle " + std::to_string(k + 1) + " out of range");
  }
  std::vector<double> t(d);
  double sin_prod = 1.0;
  for (std::size_t k = 0; k + 1 < d; ++k) {
    t[k] = sin_prod * std::cos(omega[k]);
    sin_prod *= std::sin(omega[k]);
  }
  t[d - 1] = sin_prod;
  return t;
}

double spherical_jacobian(std::span<const double> omega, std::size_t d) {
  if (d < 2) throw std::invalid_argument("spherical Jacobian needs d >= 2");
  if (omega.size() != d - 1)
    throw std::invalid_argument("expected " + std::to_string(d - 1) + " angles");
  double j = 1.0;
  for (std::size_t k = 1; k + 1 < d; ++k)  // k is 1-based index of omega_k
    j *= std::pow(std::sin(omega[k - 1]), static_cast<double>(d - 1 - k));
  return std::abs(j);
}

double spherical_restriction(const OperatorSymbol& op, std::span<const double> omega) {
  const auto t = spherical_point(omega, op.dimension());
  return symbol_magnitude(op, t);
}

}  // namespace orec
