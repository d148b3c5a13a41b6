#include "core/quantize.hpp"

#include <algorithm>
#include <cmath>

namespace litesr {

float symmetric_scale(std::span<const float> values) {
  float peak = 0.0f;
  for (float v : values) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0f) return 1.0f;
  return peak / 127.0f;
}

Tensor quantize_symmetric(const Tensor& fp32) {
  auto vals = fp32.f32();
  const float scale = symmetric_scale(vals);
  std::vector<std::int8_t> q(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const long r = std::lround(vals[i] / scale);
    q[i] = std::int8_t(std::clamp<long>(r, -127, 127));
  }
  return Tensor::from_i8(fp32.shape(), std::move(q), scale);
}

Tensor dequantize(const Tensor& i8) {
  auto q = i8.i8();
  std::vector<float> vals(q.size());
  const float scale = i8.scale();
  for (std::size_t i = 0; i < q.size(); ++i) {
    vals[i] = float(q[i] - i8.zero_point()) * scale;
  }
  return Tensor::from_data(i8.shape(), std::move(vals));
}

void CalibrationSet::add(Tensor depth_lr, Tensor intensity_lr) {
  frames_.emplace_back(std::move(depth_lr), std::move(intensity_lr));
}

std::vector<ActRange> calibrate(const Model& fp32_model,
                                const CalibrationSet& set) {
  if (fp32_model.dtype() != DType::f32) {
    fail(ErrorCode::calibration, "calibration requires an FP32 model");
  }
  if (set.size() == 0) {
    fail(ErrorCode::calibration, "calibration set is empty");
  }
  if (set.size() < kMinCalibrationFrames) {
    fail(ErrorCode::calibration,
         "calibration needs at least " +
             std::to_string(kMinCalibrationFrames) + " frames, got " +
             std::to_string(set.size()));
  }
  std::vector<ActRange> ranges;
  for (const auto& [depth, intensity] : set.frames()) {
    fp32_model.forward_recording(depth, intensity, ranges);
  }
  return ranges;
}

ModelWeights quantize_weights(const ModelWeights& fp32,
                              const std::vector<ActRange>* act_ranges) {
  if (fp32.dtype != DType::f32) {
    fail(ErrorCode::dtype, "quantize_weights expects FP32 weights");
  }
  ModelWeights q;
  q.config = fp32.config;
  q.dtype = DType::i8;
  q.gate_logit_depth = fp32.gate_logit_depth;
  q.gate_logit_intensity = fp32.gate_logit_intensity;
  for (const auto& [path, entry] : fp32.entries) {
    WeightEntry e;
    e.weight = quantize_symmetric(entry.weight);
    e.bias = entry.bias;
    q.entries.emplace(path, std::move(e));
  }
  if (act_ranges) q.act_ranges = *act_ranges;
  return q;
}

}  // namespace litesr
