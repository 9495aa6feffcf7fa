#pragma once

#include <stdexcept>
#include <string>

namespace dynent {

// One error code per named failure mode of the library surface.
enum class Errc {
  non_square,
  negative_entry,
  empty_space,
  empty_subset,
  too_large,
  index_out_of_range,
  missing_identity,
  missing_inverse,
  blow_up,
  grid_mismatch,
  missing_constant_curve,
  non_nested_bundles,
  non_positive_scale,
  negative_radius,
  unresolvable_velocity,
  zero_length,
  endpoint_mismatch,
  bad_interval,
  not_in_range,
  degenerate_direction,
  asymmetric_controls,
  window_too_small,
  negative_input,
  not_controllable,
  unknown_scenario,
  bad_override,
  unknown_parameter,
  config_error,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::non_square: return "NonSquare";
    case Errc::negative_entry: return "NegativeEntry";
    case Errc::empty_space: return "EmptySpace";
    case Errc::empty_subset: return "EmptySubset";
    case Errc::too_large: return "TooLarge";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::missing_identity: return "MissingIdentity";
    case Errc::missing_inverse: return "MissingInverse";
    case Errc::blow_up: return "BlowUp";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::missing_constant_curve: return "MissingConstantCurve";
    case Errc::non_nested_bundles: return "NonNestedBundles";
    case Errc::non_positive_scale: return "NonPositiveScale";
    case Errc::negative_radius: return "NegativeRadius";
    case Errc::unresolvable_velocity: return "UnresolvableVelocity";
    case Errc::zero_length: return "ZeroLength";
    case Errc::endpoint_mismatch: return "EndpointMismatch";
    case Errc::bad_interval: return "BadInterval";
    case Errc::not_in_range: return "NotInRange";
    case Errc::degenerate_direction: return "DegenerateDirection";
    case Errc::asymmetric_controls: return "AsymmetricControls";
    case Errc::window_too_small: return "WindowTooSmall";
    case Errc::negative_input: return "NegativeInput";
    case Errc::not_controllable: return "NotControllable";
    case Errc::unknown_scenario: return "UnknownScenario";
    case Errc::bad_override: return "BadOverride";
    case Errc::unknown_parameter: return "UnknownParameter";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }
  const char* name() const { return errc_name(code_); }

 private:
  Errc code_;
};

}  // namespace dynent
