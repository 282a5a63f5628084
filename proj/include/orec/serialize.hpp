#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orec/constants.hpp"
#include "orec/filters.hpp"
#include "orec/spectral.hpp"

namespace orec {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// All readers reject unknown keys and throw FormatError with a byte offset
// into the source text (0 when no position is known).

Json spec_to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const Json& j, std::string_view source = {});

Json descriptor_to_json(const ADescriptor& a);
ADescriptor descriptor_from_json(const Json& j, std::string_view source = {});

Json method_to_json(const FilterMethod& m);
FilterMethod read_method(std::string_view text);

Json constants_to_json(const RecoveryConstants& rc);

std::string base64_encode(std::span<const unsigned char> bytes);
/// Throws FormatError at the offending character index.
std::vector<unsigned char> base64_decode(std::string_view text);

Json field_to_json(const SpectralField& f);
SpectralField read_field(std::string_view text);

struct RunConfig {
  ProblemSpec spec;
  std::optional<std::size_t> grid_points;
  std::optional<double> grid_half_width;
  QuadratureOptions quadrature;
  std::optional<std::vector<double>> eps;
  int halvings = 5;
  std::uint64_t seed = 0;
  std::optional<ADescriptor> a_descriptor;
  std::optional<std::string> output;
};

RunConfig read_config(std::string_view text);

/// Serialized text with a trailing newline.
std::string dump(const Json& j);

}  // namespace orec
