#include "orec/serialize.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include "orec/error.hpp"

namespace orec {

namespace {

std::size_t key_offset(std::string_view src, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = src.find(quoted);
  return pos == std::string_view::npos ? 0 : pos;
}

// Strict view of a JSON object: every key must be known to the caller.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string_view src, std::string path,
               std::initializer_list<std::string_view> allowed)
      : j_(j), src_(src), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (auto k : allowed) known = known || it.key() == k;
      if (!known) fail(it.key(), "unknown key '" + path_ + "." + it.key() + "'");
    }
  }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw FormatError(what, key_offset(src_, key));
  }

  bool has(std::string_view key) const { return j_.contains(key); }

  const Json& at(std::string_view key) const {
    if (!has(key)) fail(path_, "missing key '" + path_ + "." + std::string(key) + "'");
    return j_.at(std::string(key));
  }

  double number(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_number()) fail(key, "'" + std::string(key) + "' must be a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_number_unsigned()) fail(key, "'" + std::string(key) + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_string()) fail(key, "'" + std::string(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_array()) fail(key, "'" + std::string(key) + "' must be an array");
    std::vector<double> out;
    for (const Json& x : v) {
      if (!x.is_number()) fail(key, "'" + std::string(key) + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void version() const {
    if (unsigned_int("version") != kFormatVersion)
      fail("version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
  }

 private:
  const Json& j_;
  std::string_view src_;
  std::string path_;
};

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

Json number_or_inf(double x) { return std::isinf(x) ? Json("inf") : Json(x); }

// Symbol constructors throw invalid_argument; report them as format errors.
template <typename F>
auto guarded(const ObjectReader& r, std::string_view key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    r.fail(key, e.what());
  }
}

}  // namespace

Json spec_to_json(const ProblemSpec& spec) {
  Json target;
  if (spec.target.is_laplace_power()) {
    target = {{"kind", "laplace_power"},
              {"theta", spec.target.laplace().theta},
              {"eta", spec.target.laplace().eta}};
  } else {
    target = {{"kind", "mixed_derivative"}, {"alpha", spec.target.mixed().alpha}};
  }
  return {{"d", spec.d},
          {"p", number_or_inf(spec.p)},
          {"delta", spec.delta},
          {"target", target},
          {"constraint", {{"mu", spec.mu()}, {"nu", spec.nu()}}}};
}

ProblemSpec spec_from_json(const Json& j, std::string_view src) {
  ObjectReader r(j, src, "problem", {"d", "p", "delta", "target", "constraint"});
  ProblemSpec spec;
  spec.d = r.unsigned_int("d");
  const Json& p = r.at("p");
  if (p.is_string() && p.get<std::string>() == "inf")
    spec.p = kInfinity;
  else if (p.is_number())
    spec.p = p.get<double>();
  else
    r.fail("p", "'p' must be a number or \"inf\"");
  spec.delta = r.number("delta");

  ObjectReader t(r.at("target"), src, "problem.target", {"kind", "theta", "eta", "alpha"});
  const std::string kind = t.string("kind");
  if (kind == "laplace_power") {
    if (t.has("alpha")) t.fail("alpha", "laplace_power target takes theta and eta");
    spec.target = guarded(t, "target", [&] {
      return OperatorSymbol::laplace_power(spec.d, t.number("theta"), t.number("eta"));
    });
  } else if (kind == "mixed_derivative") {
    if (t.has("theta") || t.has("eta")) t.fail("theta", "mixed_derivative target takes alpha");
    spec.target = guarded(t, "target", [&] { return OperatorSymbol::mixed_derivative(t.numbers("alpha")); });
  } else {
    t.fail("kind", "unknown target kind '" + kind + "'");
  }
  ObjectReader c(r.at("constraint"), src, "problem.constraint", {"mu", "nu"});
  spec.constraint = guarded(c, "constraint", [&] {
    return OperatorSymbol::laplace_power(spec.d, c.number("mu"), c.number("nu"));
  });
  return spec;
}

Json descriptor_to_json(const ADescriptor& a) {
  return std::visit(
      [](const auto& r) -> Json {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, Canonical>) {
          return {{"rule", "canonical"}};
        } else if constexpr (std::is_same_v<R, Constant>) {
          return {{"rule", "constant"}, {"re", r.value.real()}, {"im", r.value.imag()}};
        } else if constexpr (std::is_same_v<R, Clipped>) {
          return {{"rule", "clipped"}, {"c", r.c}};
        } else if constexpr (std::is_same_v<R, Convex>) {
          return {{"rule", "convex"}, {"w", r.w}, {"other", descriptor_to_json(*r.other)}};
        } else {
          Json values = Json::array();
          for (const auto& v : r.values) values.push_back({v.real(), v.imag()});
          return {{"rule", "user_table"},
                  {"directions", r.directions},
                  {"log_radii", r.log_radii},
                  {"values", values}};
        }
      },
      a.rule);
}

ADescriptor descriptor_from_json(const Json& j, std::string_view src) {
  ObjectReader r(j, src, "a_descriptor",
                 {"rule", "re", "im", "c", "w", "other", "directions", "log_radii", "values"});
  const std::string rule = r.string("rule");
  if (rule == "canonical") return {Canonical{}};
  if (rule == "constant") return {Constant{{r.number("re"), r.has("im") ? r.number("im") : 0.0}}};
  if (rule == "clipped") return {Clipped{r.number("c")}};
  if (rule == "convex")
    return {Convex{r.number("w"), std::make_shared<const ADescriptor>(descriptor_from_json(r.at("other"), src))}};
  if (rule == "user_table") {
    UserTable t;
    const Json& dirs = r.at("directions");
    if (!dirs.is_array()) r.fail("directions", "'directions' must be an array of vectors");
    for (const Json& u : dirs) {
      if (!u.is_array()) r.fail("directions", "'directions' must be an array of vectors");
      std::vector<double> v;
      for (const Json& x : u) v.push_back(x.get<double>());
      double n = 0;
      for (double x : v) n += x * x;
      if (!(n > 0)) r.fail("directions", "direction must be nonzero");
      for (double& x : v) x /= std::sqrt(n);
      t.directions.push_back(std::move(v));
    }
    t.log_radii = r.numbers("log_radii");
    const Json& vals = r.at("values");
    if (!vals.is_array()) r.fail("values", "'values' must be an array of [re, im] pairs");
    for (const Json& v : vals) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        r.fail("values", "'values' must be an array of [re, im] pairs");
      t.values.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    return {std::move(t)};
  }
  r.fail("rule", "unknown a_descriptor rule '" + rule + "'");
}

Json method_to_json(const FilterMethod& m) {
  Json j = {{"version", kFormatVersion}, {"spec", spec_to_json(m.spec)}};
  if (const auto* th = std::get_if<ThresholdFilter>(&m.kind)) {
    j["kind"] = "threshold";
    j["params"] = {{"beta", th->beta}};
    j["a_descriptor"] = nullptr;
  } else {
    const auto& f = std::get<FamilyFilter>(m.kind);
    j["kind"] = "family";
    j["params"] = {{"lambda1", f.lambda1}, {"lambda2", f.lambda2}};
    j["a_descriptor"] = descriptor_to_json(f.a);
  }
  return j;
}

FilterMethod read_method(std::string_view text) {
  const Json j = parse(text);
  ObjectReader r(j, text, "method", {"version", "spec", "kind", "params", "a_descriptor"});
  r.version();
  FilterMethod m{spec_from_json(r.at("spec"), text), ThresholdFilter{0.0}};
  const std::string kind = r.string("kind");
  if (kind == "threshold") {
    ObjectReader p(r.at("params"), text, "params", {"beta"});
    const double beta = p.number("beta");
    if (!(beta > 0.0) || !std::isfinite(beta)) p.fail("beta", "beta must be positive");
    m.kind = ThresholdFilter{beta};
  } else if (kind == "family") {
    ObjectReader p(r.at("params"), text, "params", {"lambda1", "lambda2"});
    const double l1 = p.number("lambda1"), l2 = p.number("lambda2");
    if (!(l1 > 0.0 && l2 > 0.0)) p.fail("lambda1", "lambda1 and lambda2 must be positive");
    m.kind = FamilyFilter{descriptor_from_json(r.at("a_descriptor"), text), l1, l2};
  } else {
    r.fail("kind", "unknown method kind '" + kind + "'");
  }
  return m;
}

Json constants_to_json(const RecoveryConstants& rc) {
  Json j = {{"regime", to_string(rc.regime)}, {"gamma", rc.gamma}};
  auto opt = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  opt("q_star", rc.q_star);
  opt("cp", rc.cp);
  opt("integral_i", rc.integral_i);
  j["error"] = rc.error;
  j["inequality_constant"] = rc.inequality_constant;
  opt("beta", rc.beta);
  opt("lambda1", rc.lambda1);
  opt("lambda2", rc.lambda2);
  return j;
}

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c) {
  const auto pos = kAlphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = bytes[i] << 16 | bytes[i + 1] << 8 | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out += kAlphabet[(v >> s) & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    unsigned v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4", text.size());
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    unsigned v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2 && (k == 3 || text[i + 3] == '=')) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int s = sextet(c);
      if (s < 0 || pad > 0) throw FormatError("invalid base64 character", i + k);
      v = v << 6 | static_cast<unsigned>(s);
    }
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>(v >> 8));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v));
  }
  return out;
}

Json field_to_json(const SpectralField& f) {
  std::vector<unsigned char> bytes;
  bytes.reserve(f.values.size() * 16);
  auto put = [&](double x) {
    const auto u = std::bit_cast<std::uint64_t>(x);
    for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<unsigned char>(u >> (8 * k)));
  };
  for (const auto& v : f.values) {
    put(v.real());
    put(v.imag());
  }
  Json axes = Json::array();
  for (const Axis& a : f.grid.axes()) axes.push_back({{"n", a.n}, {"step", a.step}});
  return {{"version", kFormatVersion},
          {"d", f.grid.dimension()},
          {"axes", axes},
          {"data_encoding", "base64-le-f64-interleaved"},
          {"data", base64_encode(bytes)}};
}

SpectralField read_field(std::string_view text) {
  const Json j = parse(text);
  ObjectReader r(j, text, "field", {"version", "d", "axes", "data_encoding", "data"});
  r.version();
  const std::size_t d = r.unsigned_int("d");
  const Json& axes_json = r.at("axes");
  if (!axes_json.is_array() || axes_json.size() != d)
    r.fail("axes", "'axes' must be an array of d entries");
  std::vector<Axis> axes;
  for (const Json& a : axes_json) {
    ObjectReader ar(a, text, "axes[]", {"n", "step"});
    axes.push_back({ar.unsigned_int("n"), ar.number("step")});
  }
  if (r.string("data_encoding") != "base64-le-f64-interleaved")
    r.fail("data_encoding", "unsupported data_encoding");
  Grid grid = guarded(r, "axes", [&] { return Grid(axes); });
  const std::string data = r.string("data");
  // offset of the payload's first character in the document
  std::size_t base = key_offset(text, "data");
  base = text.find('"', base + 6);
  base = base == std::string_view::npos ? 0 : base + 1;
  std::vector<unsigned char> bytes;
  try {
    bytes = base64_decode(data);
  } catch (const FormatError& e) {
    throw FormatError("invalid field payload", base + e.offset());
  }
  if (bytes.size() != grid.size() * 16)
    throw FormatError("payload holds " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(grid.size() * 16),
                      base);
  SpectralField f{grid, std::vector<std::complex<double>>(grid.size())};
  auto get = [&](std::size_t at) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(bytes[at + k]) << (8 * k);
    return std::bit_cast<double>(u);
  };
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = {get(16 * i), get(16 * i + 8)};
  return f;
}

RunConfig read_config(std::string_view text) {
  const Json j = parse(text);
  ObjectReader r(j, text, "config",
                 {"version", "problem", "grid", "quadrature", "eps", "seed", "method", "output"});
  r.version();
  RunConfig c;
  c.spec = spec_from_json(r.at("problem"), text);
  if (r.has("grid")) {
    ObjectReader g(r.at("grid"), text, "grid", {"points", "half_width"});
    if (g.has("points")) {
      c.grid_points = g.unsigned_int("points");
      if (*c.grid_points < 2) g.fail("points", "grid needs at least 2 points per axis");
    }
    if (g.has("half_width")) {
      c.grid_half_width = g.number("half_width");
      if (!(*c.grid_half_width > 0.0)) g.fail("half_width", "half_width must be positive");
    }
  }
  if (r.has("quadrature")) {
    ObjectReader q(r.at("quadrature"), text, "quadrature", {"initial_nodes", "tolerance", "max_points"});
    if (q.has("initial_nodes")) c.quadrature.initial_nodes = q.unsigned_int("initial_nodes");
    if (q.has("tolerance")) c.quadrature.tolerance = q.number("tolerance");
    if (q.has("max_points")) c.quadrature.max_points = q.unsigned_int("max_points");
    if (c.quadrature.initial_nodes == 0 || !(c.quadrature.tolerance > 0.0))
      q.fail("quadrature", "quadrature needs initial_nodes >= 1 and tolerance > 0");
  }
  if (r.has("eps")) {
    ObjectReader e(r.at("eps"), text, "eps", {"halvings", "values"});
    if (e.has("halvings")) c.halvings = static_cast<int>(e.unsigned_int("halvings"));
    if (e.has("values")) {
      c.eps = e.numbers("values");
      for (double x : *c.eps)
        if (!(x > 0.0)) e.fail("values", "eps values must be positive");
    }
  }
  if (r.has("seed")) c.seed = r.unsigned_int("seed");
  if (r.has("method")) {
    ObjectReader m(r.at("method"), text, "method", {"a_descriptor"});
    if (m.has("a_descriptor")) c.a_descriptor = descriptor_from_json(m.at("a_descriptor"), text);
  }
  if (r.has("output")) {
    ObjectReader o(r.at("output"), text, "output", {"path"});
    if (o.has("path")) c.output = o.string("path");
  }
  return c;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace orec
