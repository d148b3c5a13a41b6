#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/tensor.hpp"

namespace litesr {

inline constexpr double kDefaultHotPixelThreshold = 250.0;

// Hot pixels flagged from flat-field captures: temporal mean per pixel
// compared against a fixed photon-count threshold.
struct HotPixelMask {
  std::uint32_t height = kLrHeight;
  std::uint32_t width = kLrWidth;
  std::vector<std::uint8_t> mask;      // 1 == hot
  double threshold_counts = kDefaultHotPixelThreshold;
  Tensor source_mean_frame;
  bool all_flagged = false;  // degenerate threshold; caller should warn

  std::size_t flagged_count() const;
  bool at(std::uint32_t y, std::uint32_t x) const {
    return mask[std::size_t(y) * width + x] != 0;
  }
};

enum class HotPixelFill { median, mean };
enum class GainDirection { correct, corrupt };

// Per-pixel multiplicative response correction, 1.0 == ideal pixel. Entries
// outside the (0.5, 2.0) sanity band are legal but flagged.
struct NonUniformityMap {
  std::uint32_t height = kLrHeight;
  std::uint32_t width = kLrWidth;
  std::vector<float> depth_gain;
  std::vector<float> intensity_gain;
  bool out_of_band = false;

  static NonUniformityMap identity(std::uint32_t h = kLrHeight,
                                   std::uint32_t w = kLrWidth);
  void check_band();
};

HotPixelMask detect_hot_pixels(const std::vector<Tensor>& flat_frames,
                               double threshold = kDefaultHotPixelThreshold);

// Flagged pixels are replaced from their unflagged 3x3 neighbours (median by
// default, mean behind the flag); isolated flagged islands fall back to the
// global unflagged median. Unflagged pixels are returned bit-identical.
Tensor compensate_hot_pixels(const Tensor& frame, const HotPixelMask& mask,
                             HotPixelFill fill = HotPixelFill::median);

Tensor apply_nonuniformity(const Tensor& frame, std::span<const float> gain,
                           GainDirection direction);

// Gains from flat-target means: gain_p = unflagged_global_mean / pixel_mean_p
// so that multiplying an observation corrects it toward the flat response.
// Hot pixels get gain 1 (they are replaced, not rescaled). A null depth mean
// leaves the depth gains at identity.
NonUniformityMap gains_from_flat(const Tensor& mean_intensity,
                                 const Tensor* mean_depth,
                                 const HotPixelMask& mask);

// On-device calibration bundle: JSON header with base64 payloads for the
// mask, the mean flat frame and both gain maps.
struct CalibrationBundle {
  HotPixelMask hot;
  NonUniformityMap gains;
};

void save_bundle(const CalibrationBundle& b, const std::string& path);
CalibrationBundle load_bundle(const std::string& path);

}  // namespace litesr
