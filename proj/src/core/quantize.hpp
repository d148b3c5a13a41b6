#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/model.hpp"
#include "core/weights.hpp"

namespace litesr {

inline constexpr std::size_t kMinCalibrationFrames = 8;

// Per-tensor symmetric scale: max|v| / 127, or 1 for an all-zero tensor.
float symmetric_scale(std::span<const float> values);

// round(v / scale) clamped to [-127, 127]; round half away from zero.
Tensor quantize_symmetric(const Tensor& fp32);
Tensor dequantize(const Tensor& i8);

// Representative frames for activation calibration, already normalized the
// same way inference inputs are.
class CalibrationSet {
 public:
  void add(Tensor depth_lr, Tensor intensity_lr);
  std::size_t size() const { return frames_.size(); }
  const std::vector<std::pair<Tensor, Tensor>>& frames() const {
    return frames_;
  }

 private:
  std::vector<std::pair<Tensor, Tensor>> frames_;
};

// FP32 forward over every frame, folding per-layer input extrema. Requires
// at least kMinCalibrationFrames frames.
std::vector<ActRange> calibrate(const Model& fp32_model,
                                const CalibrationSet& set);

// Per-tensor symmetric INT8 weights; biases stay FP32 in the store (the
// model converts them to i32 at scale_w * scale_in when it builds). Passing
// activation ranges produces a calibrated container; omitting them produces
// an uncalibrated one whose INT8 forward is rejected.
ModelWeights quantize_weights(const ModelWeights& fp32,
                              const std::vector<ActRange>* act_ranges = nullptr);

}  // namespace litesr
