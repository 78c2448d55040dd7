#pragma once

#include <optional>
#include <string_view>

namespace apro {

/// How global and local propagation are combined into pseudo labels.
enum class CombineMode {
  parallel,    // y_global = GP(phi), y_local = LP(phi)
  gp_then_lp,  // LP(GP(phi))
  lp_then_gp,  // GP(LP(phi))
};

/// Accepts "parallel", "gp-lp" / "gp_then_lp", "lp-gp" / "lp_then_gp".
std::optional<CombineMode> parse_combine_mode(std::string_view name);
std::string_view to_string(CombineMode mode);

struct PropagationConfig {
  double zeta_g = 0.07;
  double zeta_s = 0.15;
  int lp_radius = 2;
  int lp_iterations = 20;
  CombineMode combine_mode = CombineMode::parallel;

  /// Throws ValidationError when any parameter is out of range.
  void validate() const;
};

}  // namespace apro
