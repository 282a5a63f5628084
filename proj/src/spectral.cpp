#include "orec/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "orec/parallel.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

void check_field(const Grid& grid, std::size_t count) {
  if (grid.dimension() == 0) throw std::invalid_argument("field has no axes");
  if (count != grid.size()) throw std::invalid_argument("field value count does not match its grid");
}

// e^{2 pi i x / n} with x reduced mod n first; x is a multiple of 1/4.
cplx unit_phase(double x, std::size_t n) {
  const double r = std::fmod(x, static_cast<double>(n));
  return std::polar(1.0, 2.0 * kPi * r / static_cast<double>(n));
}

// per-axis tables t[a][k] = e^{2 pi i sign f(k) / n}
using PhaseTable = std::vector<std::vector<cplx>>;

template <typename F>
PhaseTable phase_table(const Grid& g, double sign, F&& f) {
  PhaseTable t;
  for (const Axis& ax : g.axes()) {
    const double c = 0.5 * static_cast<double>(ax.n - 1);
    std::vector<cplx> row(ax.n);
    for (std::size_t k = 0; k < ax.n; ++k) row[k] = unit_phase(sign * f(c, static_cast<double>(k)), ax.n);
    t.push_back(std::move(row));
  }
  return t;
}

void apply_phases(std::vector<cplx>& v, const Grid& g, const PhaseTable& t, double scale) {
  const auto& axes = g.axes();
  detail::parallel_for(v.size(), [&](std::size_t i) {
    std::size_t rest = i;
    cplx ph = scale;
    for (std::size_t a = axes.size(); a-- > 0;) {
      ph *= t[a][rest % axes[a].n];
      rest /= axes[a].n;
    }
    v[i] *= ph;
  });
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void fft_in_place(std::vector<cplx>& v, const Grid& g, int sign) {
  std::vector<int> dims;
  for (const Axis& ax : g.axes()) dims.push_back(static_cast<int>(ax.n));
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), data, data, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("FFT planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

Grid reciprocal(const Grid& g) {
  std::vector<Axis> axes;
  for (const Axis& ax : g.axes())
    axes.push_back({ax.n, 2.0 * kPi / (static_cast<double>(ax.n) * ax.step)});
  return Grid(std::move(axes));
}

}  // namespace

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("grid needs at least one axis");
  size_ = 1;
  weight_ = 1.0;
  for (const Axis& ax : axes_) {
    if (ax.n < 2) throw std::invalid_argument("grid axis needs n >= 2");
    if (!(ax.step > 0.0) || !std::isfinite(ax.step))
      throw std::invalid_argument("grid axis needs a positive step");
    size_ *= ax.n;
    weight_ *= ax.step;
  }
}

void Grid::point(std::size_t flat, std::span<double> out) const {
  for (std::size_t a = axes_.size(); a-- > 0;) {
    out[a] = axes_[a].coordinate(flat % axes_[a].n);
    flat /= axes_[a].n;
  }
}

std::vector<double> Grid::point(std::size_t flat) const {
  std::vector<double> out(axes_.size());
  point(flat, out);
  return out;
}

std::size_t Grid::nearest(std::span<const double> xi) const {
  if (xi.size() != axes_.size()) throw std::invalid_argument("point has wrong dimension");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const Axis& ax = axes_[a];
    const double k = std::round(xi[a] / ax.step + 0.5 * static_cast<double>(ax.n - 1));
    const double clamped = std::clamp(k, 0.0, static_cast<double>(ax.n - 1));
    flat = flat * ax.n + static_cast<std::size_t>(clamped);
  }
  return flat;
}

Grid default_grid(const ProblemSpec& spec, std::optional<std::size_t> points) {
  const std::size_t n = points.value_or(spec.d <= 2 ? 256 : (spec.d == 3 ? 64 : 16));
  double half = 0.0;
  if (classify(spec) == Regime::Threshold) {
    half = 1.5 * threshold_support_radius(build_method(spec));
  } else {
    const auto sp = stationary_point(spec);
    double comp = 0.0;
    for (double x : sp.frequency) comp = std::max(comp, std::abs(x));
    half = std::max(4.0 * sp.radius, 8.0 * comp);
  }
  return Grid(std::vector<Axis>(spec.d, Axis{n, 2.0 * half / static_cast<double>(n)}));
}

double weighted_l2(const SpectralField& field, const OperatorSymbol* weight) {
  check_field(field.grid, field.values.size());
  const std::size_t d = field.grid.dimension();
  if (weight && weight->dimension() != d)
    throw std::invalid_argument("weight symbol dimension does not match the field");
  const double sum = detail::deterministic_sum(field.values.size(), [&](std::size_t i) {
    const double v = std::norm(field.values[i]);
    if (!weight || v == 0.0) return v;
    const double m = symbol_magnitude(*weight, field.grid.point(i));
    return m * m * v;
  });
  return std::sqrt(sum * field.grid.weight() / std::pow(2.0 * kPi, static_cast<double>(d)));
}

double lp_norm(const SpectralField& field, double p) {
  check_field(field.grid, field.values.size());
  if (!(p >= 2.0)) throw std::invalid_argument("lp_norm needs 2 <= p <= inf");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cplx& v : field.values) m = std::max(m, std::abs(v));
    return m;
  }
  // scale by the max modulus to keep |F|^p finite
  double m = 0.0;
  for (const cplx& v : field.values) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  const double sum = detail::deterministic_sum(field.values.size(), [&](std::size_t i) {
    return std::pow(std::abs(field.values[i]) / m, p);
  });
  return m * std::pow(sum * field.grid.weight(), 1.0 / p);
}

SpectralField apply_method(const FilterMethod& m, const SpectralField& y) {
  check_field(y.grid, y.values.size());
  if (y.grid.dimension() != m.spec.d)
    throw std::invalid_argument("field dimension does not match the method");
  SpectralField out{y.grid, std::vector<cplx>(y.values.size())};
  detail::parallel_for(y.values.size(), [&](std::size_t i) {
    if (y.values[i] == 0.0) return;
    const auto xi = y.grid.point(i);
    out.values[i] = multiplier_value(m, xi) * y.values[i];
  });
  return out;
}

SpectralField add_noise(const SpectralField& field, double delta, double p, const NoiseMode& mode,
                        std::uint64_t seed, const FilterMethod* method) {
  check_field(field.grid, field.values.size());
  if (!(delta >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
  if (!(p >= 2.0)) throw std::invalid_argument("noise norm needs 2 <= p <= inf");
  SpectralField out = field;
  if (delta == 0.0) return out;
  if (std::holds_alternative<RandomNoise>(mode)) {
    SpectralField z{field.grid, std::vector<cplx>(field.values.size())};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (cplx& v : z.values) {
      const double re = g(rng);
      v = {re, g(rng)};
    }
    const double scale = delta / lp_norm(z, p);
    for (std::size_t i = 0; i < z.values.size(); ++i) out.values[i] += scale * z.values[i];
    return out;
  }
  const auto& adv = std::get<AdversarialAt>(mode);
  const std::size_t cell = field.grid.nearest(adv.xi);
  const double size = std::isinf(p) ? delta : delta / std::pow(field.grid.weight(), 1.0 / p);
  cplx dir = 1.0;
  if (adv.reference) {
    if (std::abs(*adv.reference) > 0.0) dir = *adv.reference / std::abs(*adv.reference);
  } else if (method) {
    // error = sigma ((1 - a) Fx - a z); make -a z point along (1 - a) Fx
    const auto xi = field.grid.point(cell);
    const cplx a = a_value(*method, xi);
    cplx miss = (1.0 - a) * field.values[cell];
    if (std::abs(miss) == 0.0) miss = 1.0;
    if (std::abs(a) > 0.0) dir = -(miss / std::abs(miss)) * (std::conj(a) / std::abs(a));
  }
  out.values[cell] += size * dir;
  return out;
}

PhysicalField inverse_transform(const SpectralField& field) {
  check_field(field.grid, field.values.size());
  const Grid& g = field.grid;
  const Grid t = reciprocal(g);
  PhysicalField out{t, field.values};
  // (j - c)(k - c) = jk - ck + c(c - j)
  apply_phases(out.values, g, phase_table(g, -1.0, [](double c, double k) { return c * k; }), 1.0);
  fft_in_place(out.values, g, FFTW_BACKWARD);
  const double scale = g.weight() / std::pow(2.0 * kPi, static_cast<double>(g.dimension()));
  apply_phases(out.values, t, phase_table(t, 1.0, [](double c, double j) { return c * (c - j); }),
               scale);
  return out;
}

SpectralField forward_transform(const PhysicalField& field) {
  check_field(field.grid, field.values.size());
  const Grid& t = field.grid;
  const Grid g = reciprocal(t);
  SpectralField out{g, field.values};
  apply_phases(out.values, t, phase_table(t, 1.0, [](double c, double j) { return c * j; }), 1.0);
  fft_in_place(out.values, t, FFTW_FORWARD);
  apply_phases(out.values, g, phase_table(g, -1.0, [](double c, double k) { return c * (c - k); }),
               t.weight());
  return out;
}

}  // namespace orec
