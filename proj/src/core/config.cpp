#include "core/config.hpp"

namespace litesr {

void ModelConfig::validate() const {
  if (upscale != 4 && upscale != 8) {
    fail(ErrorCode::validation,
         "upscale must be 4 or 8, got " + std::to_string(upscale));
  }
  if (ch_e < 1 || ch_r < 1 || ch_dh < 1 || ch_ih < 1) {
    fail(ErrorCode::validation, "channel widths must be >= 1");
  }
  if (n_earb < 1 || n_rlfb < 1) {
    fail(ErrorCode::validation, "block counts must be >= 1");
  }
}

namespace {

ConvSpec conv3(std::uint32_t in, std::uint32_t out, std::uint32_t dilation = 1) {
  ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kh = s.kw = 3;
  s.dilation = dilation;
  s.padding = dilation;  // keeps spatial size
  return s;
}

ConvSpec conv1(std::uint32_t in, std::uint32_t out) {
  ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kh = s.kw = 1;
  s.padding = 0;
  return s;
}

void push_head(std::vector<LayerDef>& v, const std::string& branch,
               std::uint32_t feat_ch, std::uint32_t head_ch,
               std::uint32_t stages) {
  std::uint32_t in = feat_ch;
  for (std::uint32_t s = 0; s < stages; ++s) {
    LayerDef d{branch + ".head.up" + std::to_string(s),
               conv3(in, head_ch * 4), true, 2};
    v.push_back(std::move(d));
    in = head_ch;
  }
  v.push_back({branch + ".head.out", conv3(head_ch, 1), false, 1});
}

}  // namespace

std::vector<LayerDef> enumerate_layers(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<LayerDef> v;

  // Depth branch: LR depth features, fusion with the edge-aware guidance
  // mask, EARB stack, sub-pixel head.
  v.push_back({"depth.feat", conv3(1, cfg.ch_e), true, 1});
  v.push_back({"depth.fuse", conv3(cfg.ch_e + 1, cfg.ch_e), true, 1});
  for (std::uint32_t i = 0; i < cfg.n_earb; ++i) {
    const std::string base = "depth.earb" + std::to_string(i);
    if (!cfg.ablate_earb) {
      const std::uint32_t d = cfg.earb_dilation(i);
      v.push_back({base + ".conv1", conv3(cfg.ch_e, cfg.ch_e, d), true, 1});
      v.push_back({base + ".conv2", conv3(cfg.ch_e, cfg.ch_e, d), false, 1});
      v.push_back({base + ".proj", conv1(cfg.ch_e, cfg.ch_e), false, 1});
    } else {
      // Plain replacement: same number of conv layers, 3x3 throughout, no
      // dilation, no residual.
      v.push_back({base + ".conv1", conv3(cfg.ch_e, cfg.ch_e), true, 1});
      v.push_back({base + ".conv2", conv3(cfg.ch_e, cfg.ch_e), true, 1});
      v.push_back({base + ".conv3", conv3(cfg.ch_e, cfg.ch_e), false, 1});
    }
  }
  push_head(v, "depth", cfg.ch_e, cfg.ch_dh, cfg.shuffle_stages());

  // Intensity branch: RLFB stack.
  v.push_back({"intensity.feat", conv3(1, cfg.ch_r), true, 1});
  for (std::uint32_t i = 0; i < cfg.n_rlfb; ++i) {
    const std::string base = "intensity.rlfb" + std::to_string(i);
    if (!cfg.ablate_rlfb) {
      v.push_back({base + ".conv1", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".conv2", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".conv3", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".proj", conv1(cfg.ch_r, cfg.ch_r), false, 1});
    } else {
      v.push_back({base + ".conv1", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".conv2", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".conv3", conv3(cfg.ch_r, cfg.ch_r), true, 1});
      v.push_back({base + ".conv4", conv3(cfg.ch_r, cfg.ch_r), false, 1});
    }
  }
  push_head(v, "intensity", cfg.ch_r, cfg.ch_ih, cfg.shuffle_stages());

  return v;
}

std::size_t intensity_branch_offset(const ModelConfig& cfg) {
  const std::uint32_t per_block = 3;
  return 2 + std::size_t(cfg.n_earb) * per_block + cfg.shuffle_stages() + 1;
}

}  // namespace litesr
