#include "orec/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "orec/adversary.hpp"
#include "orec/constants.hpp"
#include "orec/error.hpp"
#include "orec/serialize.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  std::string name;
  double value;
  std::optional<double> lo;
  std::optional<double> hi;

  bool pass() const {
    if (std::isnan(value)) return false;
    return (!lo || value >= *lo) && (!hi || value <= *hi);
  }
};

Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const Check& c : checks) {
    Json j = {{"name", c.name}, {"value", std::isfinite(c.value) ? Json(c.value) : Json(std::to_string(c.value))}};
    j["min"] = c.lo ? Json(*c.lo) : Json(nullptr);
    j["max"] = c.hi ? Json(*c.hi) : Json(nullptr);
    j["pass"] = c.pass();
    a.push_back(j);
  }
  return a;
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool deterministic = false;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const Options& o) {
  if (o.config.empty()) throw InputError("--config is required for this command");
  RunConfig c = read_config(read_file(o.config));
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output = o.out;
  return c;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void emit(const Json& j, const std::optional<std::string>& path, std::ostream& out) {
  const std::string text = dump(j);
  if (!path || path->empty()) {
    out << text;
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f || !(f << text)) throw InputError("cannot write '" + *path + "'");
}

Grid grid_for(const RunConfig& c) {
  if (!c.grid_half_width) return default_grid(c.spec, c.grid_points);
  const std::size_t n = c.grid_points.value_or(c.spec.d <= 2 ? 256 : (c.spec.d == 3 ? 64 : 16));
  return Grid(std::vector<Axis>(c.spec.d, Axis{n, 2.0 * *c.grid_half_width / static_cast<double>(n)}));
}

FilterMethod method_for(const RunConfig& c) {
  if (c.a_descriptor) {
    if (classify(c.spec) == Regime::Threshold)
      throw InputError("a_descriptor applies to p = 2 family methods only");
    return family_method(c.spec, *c.a_descriptor);
  }
  return build_method(c.spec, c.quadrature);
}

bool is_canonical(const RunConfig& c) {
  return !c.a_descriptor || std::holds_alternative<Canonical>(c.a_descriptor->rule);
}

std::vector<double> eps_for(const RunConfig& c) {
  return c.eps ? *c.eps : default_eps_sequence(c.spec, c.halvings);
}

// Random spectra supported on a random subset of a coarse grid.
double max_random_inequality_ratio(const ProblemSpec& spec, std::uint64_t seed, int count) {
  const Grid g = default_grid(spec, spec.d <= 2 ? 64 : 16);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    SpectralField f{g, std::vector<std::complex<double>>(g.size())};
    const double keep = std::abs(u(rng));
    for (auto& v : f.values)
      if (std::abs(u(rng)) < keep) v = {u(rng), u(rng)};
    worst = std::max(worst, sharp_inequality_check(spec, f).ratio);
  }
  return worst;
}

double bump_inequality_ratio(const ProblemSpec& spec, const std::vector<double>& eps) {
  const double e = *std::min_element(eps.begin(), eps.end());
  const std::vector<double> one{e};
  return sharp_inequality_check(spec, bump_field(spec, e, sweep_grid(spec, one, 10.0))).ratio;
}

Json sweep_json(const std::vector<SweepEntry>& sweep) {
  Json a = Json::array();
  for (const auto& s : sweep) a.push_back({{"eps", s.eps}, {"ratio", s.ratio}});
  return a;
}

void sweep_checks(const std::vector<SweepEntry>& sweep, std::vector<Check>& checks) {
  double drops = 0, top = 0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    top = std::max(top, sweep[k].ratio);
    if (k > 0 && !(sweep[k].ratio > sweep[k - 1].ratio)) ++drops;
  }
  checks.push_back({"lower_bound_strictly_increasing", drops, std::nullopt, 0.0});
  checks.push_back({"lower_bound_below_E", top, std::nullopt, 1.0 + 1e-6});
  checks.push_back({"lower_bound_final_ratio", sweep.empty() ? 0.0 : sweep.back().ratio, 0.99, std::nullopt});
}

double slope_of_error(const ProblemSpec& spec, const QuadratureOptions& q) {
  // least-squares slope of log E against log delta
  std::vector<double> x, y;
  for (int k = -3; k <= 1; ++k) {
    ProblemSpec s = spec;
    s.delta = std::pow(10.0, k);
    x.push_back(std::log(s.delta));
    y.push_back(std::log(optimal_error(s, q).error));
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

namespace {

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json cmd_constants(const RunConfig& c) {
  return {{"spec", spec_to_json(c.spec)}, {"constants", constants_to_json(optimal_error(c.spec, c.quadrature))}};
}

Json cmd_build(const RunConfig& c) {
  const FilterMethod m = method_for(c);
  if (m.is_family()) {
    const auto rep = validate_family(m, make_probe_grid(c.spec));
    if (!rep.pass)
      throw CheckFailure("family condition fails: sup S = " + std::to_string(rep.sup_s));
  }
  return method_to_json(m);
}

Json cmd_apply(const std::string& method_path, const std::string& field_path) {
  const FilterMethod m = read_method(read_file(method_path));
  classify(m.spec);
  const SpectralField y = read_field(read_file(field_path));
  if (y.grid.dimension() != m.spec.d) throw InputError("field dimension does not match the method");
  if (m.is_family()) {
    const auto rep = validate_family(m, make_probe_grid(m.spec));
    if (!rep.pass)
      throw CheckFailure("family condition fails: sup S = " + std::to_string(rep.sup_s));
  }
  return field_to_json(apply_method(m, y));
}

std::vector<Check> filters_suite(const RunConfig& c, Json& detail) {
  std::vector<Check> checks;
  const ProblemSpec& spec = c.spec;
  const FilterMethod m = build_method(spec, c.quadrature);
  if (!m.is_family()) {
    const double r = threshold_support_radius(m);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g;
    double outside = 0.0;
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> xi(spec.d);
      double n = 0;
      for (double& x : xi) {
        x = g(rng);
        n += x * x;
      }
      for (double& x : xi) x *= 1.0001 * r / std::sqrt(n);
      outside = std::max(outside, std::abs(multiplier_value(m, xi)));
    }
    detail["support_radius"] = r;
    checks.push_back({"threshold_support_radius_finite", std::isfinite(r) ? 0.0 : 1.0, std::nullopt, 0.0});
    checks.push_back({"threshold_vanishes_outside_support", outside, std::nullopt, 0.0});
    return checks;
  }
  const auto probe = make_probe_grid(spec);
  const auto rep = validate_family(m, probe);
  const auto sp = stationary_point(spec);
  double location = 0.0;
  if (spec.target.is_laplace_power()) {
    const double theta = spec.target.laplace().theta;
    double s = 0;
    for (double x : rep.argmax_xi) s += std::pow(std::abs(x), theta);
    location = std::abs(std::log(std::pow(s, 1.0 / theta) / sp.radius));
  } else {
    double num = 0, den = 0;
    for (std::size_t j = 0; j < spec.d; ++j) {
      num += std::pow(std::abs(rep.argmax_xi[j]) - sp.frequency[j], 2);
      den += sp.frequency[j] * sp.frequency[j];
    }
    location = std::sqrt(num / den);
  }
  detail["validation"] = {{"sup_s", rep.sup_s}, {"argmax_xi", rep.argmax_xi}};
  checks.push_back({"canonical_sup_s", rep.sup_s, 1.0 - 1e-6, 1.0 + 1e-9});
  checks.push_back({"canonical_argmax_location", location, std::nullopt, 0.01});
  checks.push_back({"zero_method_rejected",
                    validate_family(family_method(spec, {Constant{0.0}}), probe).sup_s, 1.0 + 1e-9, std::nullopt});
  checks.push_back({"identity_method_rejected",
                    validate_family(family_method(spec, {Constant{1.0}}), probe).sup_s, 1.0 + 1e-9, std::nullopt});
  if (spec.target.is_laplace_power()) {
    const double scale = std::pow(sp.radius, 2 * spec.kappa());
    checks.push_back({"radial_margin_at_stationary_point", std::abs(radial_margin(spec, sp.radius)) / scale,
                      std::nullopt, 1e-9});
  } else {
    std::vector<double> t;
    for (double x : sp.frequency) t.push_back(std::log(x));
    checks.push_back({"log_margin_at_stationary_point", std::abs(log_margin(spec, t)), std::nullopt, 1e-9});
  }
  return checks;
}

std::vector<Check> lowerbound_suite(const RunConfig& c, Json& detail) {
  std::vector<Check> checks;
  const auto eps = eps_for(c);
  const auto sweep = lower_bound_sweep(c.spec, eps, sweep_grid(c.spec, eps));
  detail["lower_bound_sweep"] = sweep_json(sweep);
  if (classify(c.spec) == Regime::Threshold) {
    // the indicator field is near-extremal; its ratio tends to 1 up to grid error
    const double last = sweep.empty() ? 0.0 : sweep.back().ratio;
    checks.push_back({"threshold_final_ratio_distance", std::abs(last - 1.0), std::nullopt, 0.02});
    return checks;
  }
  sweep_checks(sweep, checks);
  return checks;
}

std::vector<Check> oracle_suite(const RunConfig& c, Json& detail) {
  std::vector<Check> checks;
  const ProblemSpec& spec = c.spec;
  const double e = optimal_error(spec, c.quadrature).error;
  const Grid grid = grid_for(c);
  if (classify(spec) == Regime::Threshold) {
    if (!std::isinf(spec.p))
      throw RegimeError("p = 2 or p = ∞", "no worst-case oracle for 2 < p < ∞");
    const auto r = worst_case_sup_noise(build_method(spec, c.quadrature), grid);
    detail["sup_noise"] = {{"value", r.worst_error}};
    checks.push_back({"sup_noise_below_E", r.worst_error / e, std::nullopt, 1.0 + 1e-6});
    return checks;
  }
  const auto probe = make_probe_grid(spec);
  auto clip0 = std::make_shared<const ADescriptor>(ADescriptor{Clipped{0.0}});
  auto clip1 = std::make_shared<const ADescriptor>(ADescriptor{Clipped{1.0}});
  const std::vector<std::pair<std::string, ADescriptor>> members{
      {"canonical", {Canonical{}}},         {"clipped_0", {Clipped{0.0}}},
      {"clipped_0.5", {Clipped{0.5}}},      {"clipped_1", {Clipped{1.0}}},
      {"convex_0.5_clipped_0", {Convex{0.5, clip0}}}, {"convex_0.25_clipped_1", {Convex{0.25, clip1}}}};
  Json rows = Json::array();
  for (const auto& [name, a] : members) {
    const auto m = family_method(spec, a);
    const auto rep = validate_family(m, probe);
    const auto dual = worst_case_dual(m, grid);
    const auto primal = worst_case_primal(m, grid, c.seed);
    rows.push_back({{"member", name}, {"sup_s", rep.sup_s}, {"dual", dual.worst_error}, {"primal", primal.worst_error}});
    checks.push_back({name + "_validated", rep.sup_s, std::nullopt, 1.0 + 1e-9});
    checks.push_back({name + "_dual_over_E", dual.worst_error / e, std::nullopt, 1.0 + 1e-6});
    checks.push_back({name + "_duality_gap", (dual.worst_error - primal.worst_error) / dual.worst_error,
                      std::nullopt, 1e-6});
    if (name == "canonical") checks.push_back({"canonical_dual_lower", dual.worst_error / e, 1.0 - 0.02, std::nullopt});
  }
  detail["members"] = rows;
  return checks;
}

std::vector<Check> inequality_suite(const RunConfig& c, Json& detail) {
  std::vector<Check> checks;
  const ProblemSpec& spec = c.spec;
  const bool l2 = classify(spec) != Regime::Threshold;
  const double worst = max_random_inequality_ratio(spec, c.seed, 100);
  detail["max_random_ratio"] = worst;
  checks.push_back({"random_spectra_ratio", worst, std::nullopt, 1.0 + (l2 ? 1e-9 : 1e-6)});
  if (l2) {
    const double bump = bump_inequality_ratio(spec, eps_for(c));
    detail["bump_ratio"] = bump;
    checks.push_back({"bump_ratio", bump, 0.99, std::nullopt});
  }
  // ||Lambda_{2nu}^{nu/2} x||^2 = sum_j ||D^{nu e_j} x||^2
  const double nu = spec.nu();
  const Grid g = default_grid(spec, spec.d <= 2 ? 64 : 16);
  std::mt19937_64 rng(c.seed + 1);
  std::normal_distribution<double> n;
  SpectralField f{g, std::vector<std::complex<double>>(g.size())};
  for (auto& v : f.values) {
    const double re = n(rng);
    v = {re, n(rng)};
  }
  const auto lap = OperatorSymbol::laplace_power(spec.d, 2 * nu, nu);
  const double lhs = std::pow(weighted_l2(f, &lap), 2);
  double rhs = 0;
  for (std::size_t j = 0; j < spec.d; ++j) {
    std::vector<double> alpha(spec.d, 0.0);
    alpha[j] = nu;
    const auto dj = OperatorSymbol::mixed_derivative(alpha);
    rhs += std::pow(weighted_l2(f, &dj), 2);
  }
  checks.push_back({"derivative_sum_identity", std::abs(lhs - rhs) / rhs, std::nullopt, 1e-12});
  return checks;
}

std::vector<Check> quadrature_suite(const RunConfig& c, Json& detail) {
  std::vector<Check> checks;
  const double areas[] = {2 * kPi, 4 * kPi, 2 * kPi * kPi};
  const double tols[] = {1e-10, 1e-8, 1e-8};
  for (std::size_t d = 2; d <= 4; ++d) {
    const ProblemSpec s{d, kInfinity, 1.0, OperatorSymbol::laplace_power(d, 2.0, 1.0),
                        OperatorSymbol::laplace_power(d, 2.0, 2.0)};
    QuadratureOptions q = c.quadrature;
    q.tolerance = std::min(q.tolerance, tols[d - 2] / 10);
    const double v = integral_i(s, q);
    checks.push_back({"sphere_area_d" + std::to_string(d), std::abs(v / areas[d - 2] - 1.0), std::nullopt,
                      tols[d - 2]});
  }
  if (classify(c.spec) == Regime::Threshold) detail["integral_i"] = integral_i(c.spec, c.quadrature);
  return checks;
}

Json cmd_verify(const RunConfig& c, const std::string& suite, bool& pass) {
  Json detail = Json::object();
  std::vector<Check> checks;
  if (suite == "filters") checks = filters_suite(c, detail);
  else if (suite == "lowerbound") checks = lowerbound_suite(c, detail);
  else if (suite == "oracle") checks = oracle_suite(c, detail);
  else if (suite == "inequality") checks = inequality_suite(c, detail);
  else checks = quadrature_suite(c, detail);
  pass = all_pass(checks);
  return {{"suite", suite}, {"spec", spec_to_json(c.spec)}, {"detail", detail},
          {"checks", checks_json(checks)}, {"pass", pass}};
}

Json cmd_certify(const RunConfig& c, bool& pass) {
  const ProblemSpec& spec = c.spec;
  const auto rc = optimal_error(spec, c.quadrature);
  const FilterMethod m = method_for(c);
  std::vector<Check> checks;
  Json cert = {{"spec", spec_to_json(spec)}, {"method", method_to_json(m)}, {"E_closed_form", rc.error},
               {"constants", constants_to_json(rc)}, {"seed", c.seed}};
  const auto eps = eps_for(c);
  const Grid grid = grid_for(c);
  if (m.is_family()) {
    const double e2 = rc.error * rc.error;
    checks.push_back({"multiplier_identity", std::abs(*rc.lambda2 + *rc.lambda1 * spec.delta * spec.delta - e2) / e2,
                      std::nullopt, 1e-12});
    const auto rep = validate_family(m, make_probe_grid(spec));
    cert["validation"] = {{"sup_s", rep.sup_s}, {"argmax_xi", rep.argmax_xi}};
    checks.push_back({"family_condition", rep.sup_s, is_canonical(c) ? std::optional(1.0 - 1e-6) : std::nullopt,
                      1.0 + 1e-9});
    const auto dual = worst_case_dual(m, grid);
    const auto primal = worst_case_primal(m, grid, c.seed);
    cert["dual"] = {{"value", dual.worst_error}, {"rho", dual.rho}, {"kappa", dual.kappa}};
    cert["primal"] = {{"value", primal.worst_error}};
    checks.push_back({"dual_upper", dual.worst_error / rc.error, std::nullopt, 1.0 + 1e-6});
    if (is_canonical(c)) checks.push_back({"dual_lower", dual.worst_error / rc.error, 1.0 - 0.02, std::nullopt});
    checks.push_back({"duality_gap", (dual.worst_error - primal.worst_error) / dual.worst_error, std::nullopt, 1e-6});
    const auto sweep = lower_bound_sweep(spec, eps, sweep_grid(spec, eps));
    cert["lower_bound_sweep"] = sweep_json(sweep);
    sweep_checks(sweep, checks);
    const double worst = max_random_inequality_ratio(spec, c.seed, 100);
    const double bump = bump_inequality_ratio(spec, eps);
    cert["inequality"] = {{"max_ratio", worst}, {"bump_ratio", bump}};
    checks.push_back({"inequality_random_spectra", worst, std::nullopt, 1.0 + 1e-9});
    checks.push_back({"inequality_bump", bump, 0.99, std::nullopt});
  } else {
    cert["dual"] = nullptr;
    cert["primal"] = nullptr;
    if (std::isinf(spec.p)) {
      const auto r = worst_case_sup_noise(m, grid);
      cert["sup_noise"] = {{"value", r.worst_error}};
      checks.push_back({"sup_noise_upper", r.worst_error / rc.error, std::nullopt, 1.0 + 1e-6});
    }
    const auto sweep = lower_bound_sweep(spec, eps, sweep_grid(spec, eps));
    cert["lower_bound_sweep"] = sweep_json(sweep);
    const double worst = max_random_inequality_ratio(spec, c.seed, 100);
    cert["inequality"] = {{"max_ratio", worst}};
    checks.push_back({"inequality_random_spectra", worst, std::nullopt, 1.0 + 1e-6});
    checks.push_back({"error_scaling_slope", std::abs(slope_of_error(spec, c.quadrature) - rc.gamma), std::nullopt, 1e-6});
  }
  pass = all_pass(checks);
  cert["checks"] = checks_json(checks);
  cert["pass"] = pass;
  return cert;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fourier-multiplier recovery methods: constants, filters and worst-case certificates"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "run configuration (JSON)");
  app.add_option("--seed", o.seed, "override the configured seed");
  app.add_option("--out", o.out, "write the report to this path");
  app.add_flag("--deterministic", o.deterministic, "omit timestamps from reports");
  auto* constants = app.add_subcommand("constants", "closed-form constants of the configured problem");
  auto* build = app.add_subcommand("build", "write the optimal (or configured) method");
  auto* apply = app.add_subcommand("apply", "apply a method file to a spectral field file");
  std::string method_path, field_path;
  apply->add_option("method", method_path)->required();
  apply->add_option("field", field_path)->required();
  auto* certify = app.add_subcommand("certify", "run every certification and emit a certificate");
  auto* verify = app.add_subcommand("verify", "run one verification suite");
  std::string suite;
  verify->add_option("suite", suite)
      ->required()
      ->check(CLI::IsMember({"filters", "lowerbound", "oracle", "inequality", "quadrature"}));
  for (auto* sub : {constants, build, apply, certify, verify}) sub->fallthrough();

  std::vector<const char*> argv{"orec"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  try {
    if (*apply) {
      emit(cmd_apply(method_path, field_path), o.out.empty() ? std::nullopt : std::optional(o.out), out);
      return kExitOk;
    }
    const RunConfig c = load_config(o);
    bool pass = true;
    Json report;
    if (*constants) report = cmd_constants(c);
    else if (*build) report = cmd_build(c);
    else if (*certify) report = cmd_certify(c, pass);
    else report = cmd_verify(c, suite, pass);
    if (!o.deterministic && !*build) report["generated_at"] = timestamp();
    emit(report, c.output, out);
    if (!pass) {
      err << "one or more checks failed\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  } catch (const RegimeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRegime;
  } catch (const CheckFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

}  // namespace orec
