#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "apro/config.hpp"
#include "apro/tensor.hpp"

namespace apro {

/// Per-pixel labeled / unlabeled flags, row-major.
class RegionMask {
 public:
  RegionMask() = default;
  /// All pixels unlabeled.
  RegionMask(std::size_t height, std::size_t width);
  /// `unlabeled[i]` nonzero marks pixel i as unlabeled.
  RegionMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> unlabeled);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  bool unlabeled(std::size_t node) const { return unlabeled_[node] != 0; }
  void set_labeled(std::size_t node, bool labeled) { unlabeled_[node] = labeled ? 0 : 1; }
  std::size_t unlabeled_count() const noexcept;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> unlabeled_;
};

/// Propagated soft labels. Cascade modes store the one cascaded result in both slots.
struct SoftLabelPair {
  DenseField y_global;
  DenseField y_local;
  CombineMode mode = CombineMode::parallel;
  bool identical = false;
};

/// GP and LP composed per `config.combine_mode`. When `feature` is given, its
/// spanning tree drives a second GP pass that is averaged with the image pass.
SoftLabelPair generate_pseudo_labels(const GuideTensor& guide,
                                     const std::optional<GuideTensor>& feature,
                                     const DenseField& phi, const PropagationConfig& config);

/// GP stage of generate_pseudo_labels (image tree, optionally averaged with the feature tree).
DenseField guided_global_propagate(const GuideTensor& guide,
                                   const std::optional<GuideTensor>& feature,
                                   const DenseField& phi, double zeta_g);

/// Mean L1 distance between `pred` and the labels over unlabeled pixels and
/// channels; parallel pairs contribute one mean per label. Empty masks give 0.
double affinity_loss(const DenseField& pred, const SoftLabelPair& labels, const RegionMask& mask);

}  // namespace apro
