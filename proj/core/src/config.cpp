#include "apro/config.hpp"

#include <cmath>

#include "apro/errors.hpp"

namespace apro {

std::optional<CombineMode> parse_combine_mode(std::string_view name) {
  if (name == "parallel") return CombineMode::parallel;
  if (name == "gp-lp" || name == "gp_then_lp") return CombineMode::gp_then_lp;
  if (name == "lp-gp" || name == "lp_then_gp") return CombineMode::lp_then_gp;
  return std::nullopt;
}

std::string_view to_string(CombineMode mode) {
  switch (mode) {
    case CombineMode::parallel: return "parallel";
    case CombineMode::gp_then_lp: return "gp-lp";
    case CombineMode::lp_then_gp: return "lp-gp";
  }
  return "unknown";
}

void PropagationConfig::validate() const {
  if (!(zeta_g > 0.0) || !std::isfinite(zeta_g)) throw ValidationError("zeta_g must be positive");
  if (!(zeta_s > 0.0) || !std::isfinite(zeta_s)) throw ValidationError("zeta_s must be positive");
  if (lp_radius < 1) throw ValidationError("lp_radius must be at least 1");
  if (lp_iterations < 1) throw ValidationError("lp_iterations must be at least 1");
  switch (combine_mode) {
    case CombineMode::parallel:
    case CombineMode::gp_then_lp:
    case CombineMode::lp_then_gp:
      return;
  }
  throw ValidationError("unknown combine mode");
}

}  // namespace apro
