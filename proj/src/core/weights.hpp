#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/tensor.hpp"

namespace litesr {

struct WeightEntry {
  Tensor weight;            // FP32, or INT8 with a per-tensor scale
  std::vector<float> bias;  // always FP32 in the container
};

// Min/max observed for one activation site (the input of one conv layer, in
// enumerate_layers() order).
struct ActRange {
  float lo = 0.0f;
  float hi = 0.0f;
};

// Flat weight store keyed by layer path, plus the two Eq.-style gate logits.
// An INT8 store additionally carries calibration ranges once calibrated.
struct ModelWeights {
  ModelConfig config;
  DType dtype = DType::f32;
  std::map<std::string, WeightEntry> entries;
  double gate_logit_depth = 0.0;
  double gate_logit_intensity = 0.0;
  std::vector<ActRange> act_ranges;  // empty => uncalibrated

  bool calibrated() const { return !act_ranges.empty(); }
};

// Deterministic fixture: seeded uniform weights and biases in [-0.1, 0.1],
// gates at logit(0.1) so an untrained model starts near the bicubic baseline.
ModelWeights fixture_weights(const ModelConfig& config, std::uint64_t seed);

// --- container file ---------------------------------------------------------
//
// Little-endian "LSRW" container, CRC32 over all preceding bytes at the end:
//
//   0   magic            "LSRW"
//   4   version          u16      (1)
//   6   dtype            u8       (0 = FP32, 1 = INT8)
//   7   flags            u8       bit0 ablate_earb, bit1 ablate_rlfb
//   8   config           7 x u16  ch_e ch_r ch_dh ch_ih n_earb n_rlfb upscale
//   22  entry_count      u32
//   26  entries...
//   end crc32            u32
//
// Entry: path_len u16 | path | dtype u8 | shape 4 x u32 | scale f32 (INT8
// only) | raw data. Layer weights are stored as "<path>.weight" and
// "<path>.bias" (bias shape (cout,1,1,1), FP32 in both container dtypes);
// gate logits as 1x1x1x1 FP32 entries; calibration ranges as one
// (n_layers, 2, 1, 1) FP32 entry "act.ranges".

void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w);
ModelWeights deserialize_weights(const std::uint8_t* data, std::size_t len);

}  // namespace litesr
