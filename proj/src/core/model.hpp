#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "core/config.hpp"
#include "core/weights.hpp"

namespace litesr {

// One forward pass worth of outputs. The gated-residual identity
// hr == base + sigmoid(gate_logit) * residual holds elementwise for both
// modalities by construction.
struct SRResult {
  Tensor depth_hr;
  Tensor intensity_hr;
  Tensor base_depth;
  Tensor base_intensity;
  Tensor residual_depth;
  Tensor residual_intensity;
};

struct ParamCounts {
  std::uint64_t params = 0;
  std::uint64_t bytes = 0;
  std::uint64_t macs = 0;
};

struct QuantParams {
  float scale = 1.0f;
  int zero_point = 0;
};

// Immutable executable graph. Building validates every layer path and shape
// against the config; forward calls are const and safe to run concurrently.
class Model {
 public:
  static Model build(ModelWeights weights);

  const ModelConfig& config() const { return config_; }
  DType dtype() const { return dtype_; }
  bool calibrated() const { return !act_params_.empty(); }
  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<LayerDef>& layers() const { return layers_; }

  SRResult forward(const Tensor& depth_lr, const Tensor& intensity_lr) const;

  // FP32 forward that also folds per-layer input extrema into `ranges`
  // (resized on first use). Used by the quantizer's calibration pass.
  SRResult forward_recording(const Tensor& depth_lr,
                             const Tensor& intensity_lr,
                             std::vector<ActRange>& ranges) const;

  ParamCounts count_params() const;

  double gate_depth() const { return gate_logit_depth_; }
  double gate_intensity() const { return gate_logit_intensity_; }

 private:
  struct LayerState {
    // FP32 payload, or INT8 payload + per-tensor scale.
    Tensor weight;
    std::vector<float> bias;
    std::vector<std::int32_t> bias_q;  // round(b / (s_w * s_in)), INT8 path
    QuantParams input_q;               // input-site quantization, INT8 path
  };

  SRResult run(const Tensor& depth_lr, const Tensor& intensity_lr,
               std::vector<ActRange>* recorder) const;
  Tensor run_layer(std::size_t idx, const Tensor& input,
                   std::vector<ActRange>* recorder) const;
  Tensor conv_int8(std::size_t idx, const Tensor& input) const;

  ModelConfig config_;
  DType dtype_ = DType::f32;
  std::vector<LayerDef> layers_;
  std::vector<LayerState> states_;
  std::vector<QuantParams> act_params_;
  double gate_logit_depth_ = 0.0;
  double gate_logit_intensity_ = 0.0;
};

// Edge-aware guidance mask: Sobel magnitude of the LR intensity image,
// min-max normalized per frame to [0, 1] (all zeros for a flat frame).
Tensor guidance_mask(const Tensor& intensity_lr);

// Derived asymmetric INT8 params for an observed range; the range is widened
// to include zero so that zero padding stays exact. Degenerate ranges fall
// back to scale 1.
QuantParams activation_quant_params(const ActRange& r);

}  // namespace litesr
