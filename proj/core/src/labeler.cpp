#include "apro/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apro/errors.hpp"
#include "apro/global_prop.hpp"
#include "apro/grid_graph.hpp"
#include "apro/local_prop.hpp"

namespace apro {

RegionMask::RegionMask(std::size_t height, std::size_t width)
    : height_(height), width_(width), unlabeled_(height * width, 1) {}

RegionMask::RegionMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> unlabeled)
    : height_(height), width_(width), unlabeled_(std::move(unlabeled)) {
  if (unlabeled_.size() != height * width) {
    throw ValidationError("region mask " + std::to_string(height) + "x" + std::to_string(width) +
                          " holds " + std::to_string(unlabeled_.size()) + " flags");
  }
}

std::size_t RegionMask::unlabeled_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(unlabeled_.begin(), unlabeled_.end(), [](std::uint8_t f) { return f != 0; }));
}

DenseField guided_global_propagate(const GuideTensor& guide,
                                   const std::optional<GuideTensor>& feature,
                                   const DenseField& phi, double zeta_g) {
  require_aligned(guide, phi, "global propagation");
  DenseField y = global_propagate(guide_spanning_tree(guide), phi, zeta_g);
  if (feature) {
    require_aligned(*feature, phi, "feature-guided propagation");
    const DenseField yf = global_propagate(guide_spanning_tree(*feature), phi, zeta_g);
    auto dst = y.values();
    const auto src = yf.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.5 * (dst[i] + src[i]);
  }
  return y;
}

SoftLabelPair generate_pseudo_labels(const GuideTensor& guide,
                                     const std::optional<GuideTensor>& feature,
                                     const DenseField& phi, const PropagationConfig& config) {
  config.validate();
  guide.validate();
  phi.validate();
  require_aligned(guide, phi, "generate_pseudo_labels");

  auto gp = [&](const DenseField& in) {
    return guided_global_propagate(guide, feature, in, config.zeta_g);
  };
  auto lp = [&](const DenseField& in) {
    return local_propagate(guide, in, config.zeta_s, config.lp_radius, config.lp_iterations);
  };

  SoftLabelPair out;
  out.mode = config.combine_mode;
  switch (config.combine_mode) {
    case CombineMode::parallel:
      out.y_global = gp(phi);
      out.y_local = lp(phi);
      break;
    case CombineMode::gp_then_lp:
      out.y_global = lp(gp(phi));
      out.y_local = out.y_global;
      out.identical = true;
      break;
    case CombineMode::lp_then_gp:
      out.y_global = gp(lp(phi));
      out.y_local = out.y_global;
      out.identical = true;
      break;
  }
  return out;
}

namespace {

void require_same_shape(const DenseField& a, const DenseField& b, const char* what) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError(std::string("affinity_loss: ") + what + " is " +
                          std::to_string(b.channels()) + "x" + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + " but pred is " +
                          std::to_string(a.channels()) + "x" + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()));
  }
}

double masked_l1(const DenseField& pred, const DenseField& label, const RegionMask& mask) {
  const std::size_t n = pred.pixels();
  double total = 0.0;
  for (std::size_t c = 0; c < pred.channels(); ++c) {
    const auto p = pred.plane(c);
    const auto l = label.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask.unlabeled(i)) total += std::abs(p[i] - l[i]);
    }
  }
  return total / static_cast<double>(mask.unlabeled_count() * pred.channels());
}

}  // namespace

double affinity_loss(const DenseField& pred, const SoftLabelPair& labels, const RegionMask& mask) {
  pred.validate();
  require_same_shape(pred, labels.y_global, "y_global");
  if (mask.height() != pred.height() || mask.width() != pred.width()) {
    throw ValidationError("affinity_loss: mask dimensions differ from pred");
  }
  if (mask.unlabeled_count() == 0) return 0.0;
  double loss = masked_l1(pred, labels.y_global, mask);
  if (!labels.identical) {
    require_same_shape(pred, labels.y_local, "y_local");
    loss += masked_l1(pred, labels.y_local, mask);
  }
  return loss;
}

}  // namespace apro
