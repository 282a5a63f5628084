#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "orec/cli.hpp"
#include "orec/error.hpp"
#include "orec/serialize.hpp"
#include "support.hpp"

using namespace orec;
using namespace orec::testing;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "orec_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string config_text(const ProblemSpec& spec, const std::string& extra = "") {
  Json j = {{"version", 1}, {"problem", spec_to_json(spec)}};
  if (!extra.empty()) j.update(Json::parse(extra));
  return j.dump();
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("constants command") {
  const auto cfg = write("lap.json", config_text(laplace_spec(2, 2.0, 1.0, 1.0, 1.0, 2.0, 2.0)));
  const auto r = run({"constants", "--config", cfg.string(), "--deterministic"});
  REQUIRE(r.code == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["constants"]["error"].get<double>() == doctest::Approx(0.5641896).epsilon(1e-7));
  CHECK(j["constants"]["regime"] == "laplace_l2");
  CHECK_FALSE(j.contains("generated_at"));
  CHECK(Json::parse(run({"constants", "--config", cfg.string()}).out).contains("generated_at"));

  // theta = mu and delta = (2 pi)^{d/2} give E = 1
  const auto unit = write("unit.json", config_text(laplace_spec(3, 2.0, std::pow(2 * pi, 1.5), 2.0, 1.0, 2.0, 3.0)));
  const auto u = Json::parse(run({"constants", "--config", unit.string()}).out);
  CHECK(u["constants"]["error"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exit codes") {
  const auto bad = write("bad.json", config_text(laplace_spec(1, kInfinity, 1.0, 2.0, 2.0, 2.0, 2.0)));
  const auto r = run({"constants", "--config", bad.string()});
  CHECK(r.code == kExitRegime);
  CHECK(r.err.find("γ ∈ (0,1)") != std::string::npos);

  const auto unknown = write("unknown.json", config_text(laplace_spec(1, 2.0, 1.0, 2.0, 1.0, 2.0, 2.0), R"({"colour": 1})"));
  const auto u = run({"constants", "--config", unknown.string()});
  CHECK(u.code == kExitBadInput);
  CHECK(u.err.find("colour") != std::string::npos);

  const auto broken = write("broken.json", R"({"version": 1, "problem": [})");
  const auto b = run({"constants", "--config", broken.string()});
  CHECK(b.code == kExitBadInput);
  CHECK(b.err.find("at byte 27") != std::string::npos);

  CHECK(run({"constants"}).code == kExitBadInput);
  CHECK(run({"constants", "--config", "/nonexistent/x.json"}).code == kExitBadInput);
  CHECK(run({"verify", "nonsense", "--config", bad.string()}).code == kExitBadInput);
  CHECK(run({}).code == kExitBadInput);
}

TEST_CASE("config reader") {
  const auto spec = derivative_spec({0.5, 0.0, 1.0}, 2.0, 0.3, 1.5, 2.5);
  const auto c = read_config(config_text(
      spec, R"({"grid": {"points": 32, "half_width": 4.0}, "eps": {"halvings": 3, "values": [0.1, 0.05]},
                "seed": 99, "quadrature": {"tolerance": 1e-8}, "method": {"a_descriptor": {"rule": "clipped", "c": 0.5}},
                "output": {"path": "x.json"}})"));
  CHECK(c.spec.target == spec.target);
  CHECK(c.spec.constraint == spec.constraint);
  CHECK(c.spec.delta == 0.3);
  CHECK(*c.grid_points == 32);
  CHECK(*c.grid_half_width == 4.0);
  CHECK(c.halvings == 3);
  CHECK(c.eps->size() == 2);
  CHECK(c.seed == 99);
  CHECK(c.quadrature.tolerance == 1e-8);
  CHECK(std::get<Clipped>(c.a_descriptor->rule).c == 0.5);
  CHECK(*c.output == "x.json");
  CHECK_THROWS_AS(read_config(R"({"problem": {}})"), FormatError);
  CHECK_THROWS_AS(read_config(config_text(spec, R"({"version": 2})")), FormatError);
  const std::string neg = R"({"version":1,"problem":{"d":1,"p":2,"delta":1,"target":{"kind":"laplace_power","theta":-1,"eta":1},"constraint":{"mu":2,"nu":2}}})";
  CHECK_THROWS_AS(read_config(neg), FormatError);
  const auto inf = read_config(config_text(laplace_spec(2, kInfinity, 1.0, 2.0, 1.0, 2.0, 2.0)));
  CHECK(std::isinf(inf.spec.p));
}

TEST_CASE("base64") {
  auto enc = [](std::string s) {
    return base64_encode(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
  };
  CHECK(enc("") == "");
  CHECK(enc("M") == "TQ==");
  CHECK(enc("Ma") == "TWE=");
  CHECK(enc("Man") == "TWFu");
  CHECK(enc("any carnal pleasure.") == "YW55IGNhcm5hbCBwbGVhc3VyZS4=");
  const auto d = base64_decode("YW55IGNhcm5hbCBwbGVhc3VyZS4=");
  CHECK(std::string(d.begin(), d.end()) == "any carnal pleasure.");
  try {
    base64_decode("TWFu*WE=");
    FAIL("no throw");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(base64_decode("TWF"), FormatError);
  CHECK_THROWS_AS(base64_decode("T=Fu"), FormatError);
}

TEST_CASE("field files round-trip bit-exactly") {
  const Grid g({{3, 0.1}, {4, 1e-300}});
  SpectralField f{g, {}};
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values.emplace_back(std::nextafter(1.0 / (i + 1.0), 2.0), -std::ldexp(3.0, -1074 + static_cast<int>(i)));
  f.values[5] = {-0.0, std::numeric_limits<double>::max()};
  const auto back = read_field(dump(field_to_json(f)));
  CHECK(back.grid == g);
  REQUIRE(back.values.size() == f.values.size());
  CHECK(std::memcmp(back.values.data(), f.values.data(), 16 * f.values.size()) == 0);

  std::string text = dump(field_to_json(f));
  const auto at = text.find("\"data\": \"") + 9;
  text[at + 3] = '!';
  try {
    read_field(text);
    FAIL("no throw");
  } catch (const FormatError& e) {
    CHECK(e.offset() == at + 3);
  }
  Json short_payload = field_to_json(f);
  short_payload["data"] = "AAAA";
  CHECK_THROWS_AS(read_field(short_payload.dump()), FormatError);
}

TEST_CASE("build and apply") {
  const auto spec = laplace_spec(1, 2.0, 0.5, 2.0, 1.0, 2.0, 2.0);
  const auto cfg = write("b.json", config_text(spec));
  const auto method_path = scratch("m.json");
  REQUIRE(run({"build", "--config", cfg.string(), "--out", method_path.string()}).code == kExitOk);
  const auto m = read_method(read(method_path));
  CHECK(m.is_family());
  CHECK(dump(method_to_json(m)) == read(method_path));

  const Grid g({{16, 0.5}});
  SpectralField y{g, std::vector<std::complex<double>>(g.size(), {1.0, -2.0})};
  const auto field_path = write("y.json", dump(field_to_json(y)));
  const auto out = run({"apply", method_path.string(), field_path.string()});
  REQUIRE(out.code == kExitOk);
  const auto r = read_field(out.out);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(r.values[i] - multiplier_value(m, g.point(i)) * y.values[i]) == 0.0);

  // the zero method is rejected by validation before use
  const auto zero_cfg = write("z.json", config_text(spec, R"({"method": {"a_descriptor": {"rule": "constant", "re": 0}}})"));
  CHECK(run({"build", "--config", zero_cfg.string()}).code == kExitCheckFailed);
  Json zero = method_to_json(m);
  zero["a_descriptor"] = {{"rule", "constant"}, {"re", 0.0}};
  const auto zero_path = write("zm.json", zero.dump());
  CHECK(run({"apply", zero_path.string(), field_path.string()}).code == kExitCheckFailed);

  // threshold methods carry no validation; a zero field maps to zero
  const auto th = write("th.json", config_text(laplace_spec(1, 4.0, 0.5, 2.0, 1.0, 2.0, 2.0)));
  const auto th_path = scratch("th_m.json");
  REQUIRE(run({"build", "--config", th.string(), "--out", th_path.string()}).code == kExitOk);
  SpectralField z{g, std::vector<std::complex<double>>(g.size())};
  const auto z_path = write("zf.json", dump(field_to_json(z)));
  const auto zo = run({"apply", th_path.string(), z_path.string()});
  REQUIRE(zo.code == kExitOk);
  for (const auto& v : read_field(zo.out).values) CHECK(v == std::complex<double>(0.0));

  CHECK(run({"apply", method_path.string(), cfg.string()}).code == kExitBadInput);
}

TEST_CASE("verify suites") {
  const auto mixed = write("v3.json", config_text(derivative_spec({0.5, 0.5}, 2.0, 1.0, 2.0, 2.0), R"({"grid": {"points": 64}})"));
  for (const std::string suite : {"filters", "lowerbound", "oracle", "inequality", "quadrature"}) {
    const auto r = run({"verify", suite, "--config", mixed.string(), "--deterministic"});
    CHECK_MESSAGE(r.code == kExitOk, suite << ": " << r.out);
    CHECK(Json::parse(r.out)["pass"] == true);
  }
  const auto sup = write("vinf.json", config_text(laplace_spec(1, kInfinity, 0.5, 2.0, 0.0, 2.0, 1.0), R"({"grid": {"points": 512}})"));
  for (const std::string suite : {"filters", "lowerbound", "oracle", "inequality"})
    CHECK_MESSAGE(run({"verify", suite, "--config", sup.string()}).code == kExitOk, suite);
  const auto mid = write("v4.json", config_text(laplace_spec(1, 4.0, 0.5, 2.0, 1.0, 2.0, 2.0)));
  CHECK(run({"verify", "oracle", "--config", mid.string()}).code == kExitRegime);
}

TEST_CASE("certify is reproducible") {
  const auto cfg = write("c.json", config_text(laplace_spec(1, kInfinity, 0.5, 2.0, 0.0, 2.0, 1.0), R"({"grid": {"points": 1024}})"));
  const auto a = run({"certify", "--config", cfg.string(), "--deterministic", "--seed", "3"});
  const auto b = run({"certify", "--config", cfg.string(), "--deterministic", "--seed", "3"});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  const auto j = Json::parse(a.out);
  CHECK(j["seed"] == 3);
  for (const auto& c : j["checks"]) CHECK_MESSAGE(c["pass"] == true, c.dump());

  const auto mixed = write("c3.json", config_text(derivative_spec({0.5, 0.5}, 2.0, 1.0, 2.0, 2.0), R"({"grid": {"points": 128}})"));
  const auto r = run({"certify", "--config", mixed.string(), "--deterministic"});
  CHECK(r.code == kExitOk);
  const auto c = Json::parse(r.out);
  const double e = c["E_closed_form"].get<double>();
  CHECK(c["dual"]["value"].get<double>() <= e * (1 + 1e-6));
  CHECK(c["dual"]["value"].get<double>() >= e * (1 - 0.02));
}
