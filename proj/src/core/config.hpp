#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/tensor.hpp"

namespace litesr {

// LR sensor footprint: 32 rows x 48 columns.
inline constexpr std::uint32_t kLrHeight = 32;
inline constexpr std::uint32_t kLrWidth = 48;

struct ModelConfig {
  std::uint32_t ch_e = 10;   // EARB width (depth branch)
  std::uint32_t ch_r = 5;    // RLFB width (intensity branch)
  std::uint32_t ch_dh = 6;   // depth head width
  std::uint32_t ch_ih = 4;   // intensity head width
  std::uint32_t n_earb = 4;
  std::uint32_t n_rlfb = 4;
  std::uint32_t upscale = 4;  // 4 -> 256x256 target, 8 -> 512x512
  bool ablate_earb = false;
  bool ablate_rlfb = false;

  void validate() const;
  std::uint32_t target_size() const { return upscale == 4 ? 256 : 512; }
  // Sub-pixel stages in each head; the final resize to the square target is
  // bicubic, mirroring the baseline path.
  std::uint32_t shuffle_stages() const { return upscale == 4 ? 2 : 3; }
  // EARB dilation schedule, cycled when n_earb != 4.
  std::uint32_t earb_dilation(std::uint32_t block) const {
    static constexpr std::uint32_t sched[4] = {1, 2, 4, 2};
    return sched[block % 4];
  }

  bool operator==(const ModelConfig&) const = default;
};

// One conv layer of the frozen compute graph. The enumeration order below is
// a wire-level contract: fixture RNG consumption, container canonical order
// and activation-range indices all follow it.
struct LayerDef {
  std::string path;
  ConvSpec spec;
  bool relu_after = false;
  std::uint32_t shuffle_r = 1;  // pixel-shuffle factor applied after the conv
};

// Execution-ordered conv layers: depth branch (feat, fuse, blocks, head),
// then intensity branch, as demanded by the config.
std::vector<LayerDef> enumerate_layers(const ModelConfig& config);

// Index of the first intensity-branch layer within enumerate_layers().
std::size_t intensity_branch_offset(const ModelConfig& config);

inline const char* kGateDepthPath = "gate.depth_logit";
inline const char* kGateIntensityPath = "gate.intensity_logit";
inline const char* kActRangesPath = "act.ranges";

}  // namespace litesr
